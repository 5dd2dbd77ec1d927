import sys
import logging
from pathlib import Path

# Setup paths first
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

# Import config after setting up paths
from config import Config

logger = logging.getLogger(__name__)

USAGE = "usage: python app.py serve | python app.py cli <command> [options]"

def run_fastapi():
    import uvicorn
    from main import app

    logging.basicConfig(
        level=getattr(logging, Config.app.LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stdout)
        ]
    )
    logger.info(f"Starting FastAPI on port {Config.app.API_PORT}...")
    uvicorn.run(
        app,
        host=Config.app.API_HOST,
        port=Config.app.API_PORT,
        log_level=Config.app.LOG_LEVEL.lower()
    )

def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv or argv[0] not in ("serve", "cli"):
        print(USAGE, file=sys.stderr)
        return 1
    if argv[0] == "serve":
        run_fastapi()
        return 0

    from cli import main as cli_main
    return cli_main(argv[1:])

if __name__ == "__main__":
    sys.exit(main())
