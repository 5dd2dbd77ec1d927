import os
from dotenv import load_dotenv

load_dotenv()

class SolverDefaults:
    TOL: float = float(os.getenv("SOLVER_TOL", "1e-10"))
    MAX_ITER: int = int(os.getenv("SOLVER_MAX_ITER", "100000"))
    FALLBACK_TAU: float = float(os.getenv("SOLVER_FALLBACK_TAU", "0.05"))
    STAGNATION_WINDOW: int = int(os.getenv("SOLVER_STAGNATION_WINDOW", "200"))
    SAMPLE_BUDGET: int = int(os.getenv("SOLVER_SAMPLE_BUDGET", "256"))
    SEED: int = int(os.getenv("SOLVER_SEED", "0"))

class PolyhedraDefaults:
    QP_TOL: float = float(os.getenv("POLY_QP_TOL", "1e-12"))
    QP_MAX_ITER: int = int(os.getenv("POLY_QP_MAX_ITER", "10000"))
    SMOOTH_MARGIN: float = float(os.getenv("POLY_SMOOTH_MARGIN", "1e-8"))
    RANK_TOL: float = float(os.getenv("POLY_RANK_TOL", "1e-10"))

class AlignmentDefaults:
    DELTA_SCALE: float = float(os.getenv("ALIGN_DELTA_SCALE", "1e-3"))
    GRID_K: int = int(os.getenv("ALIGN_GRID_K", "101"))
    SHRINK_ATTEMPTS: int = int(os.getenv("ALIGN_SHRINK_ATTEMPTS", "3"))
    DIRECTION_BUDGET: int = int(os.getenv("ALIGN_DIRECTION_BUDGET", "64"))
    BOUND_SLACK: float = float(os.getenv("ALIGN_BOUND_SLACK", "1e-8"))
    POTENTIAL_SAMPLES: int = int(os.getenv("ALIGN_POTENTIAL_SAMPLES", "16"))
    CONVEXITY_SAMPLES: int = int(os.getenv("ALIGN_CONVEXITY_SAMPLES", "32"))

class MediationDefaults:
    DIMINISHING_C: float = float(os.getenv("MEDIATE_DIMINISHING_C", "5.0"))
    OUTER_TOL: float = float(os.getenv("MEDIATE_OUTER_TOL", "1e-8"))
    MAX_OUTER_ITER: int = int(os.getenv("MEDIATE_MAX_OUTER_ITER", "500"))
    DIVERGENCE_FACTOR: float = float(os.getenv("MEDIATE_DIVERGENCE_FACTOR", "10.0"))

class NetworkDefaults:
    CAPACITY_FACTOR: float = float(os.getenv("NET_CAPACITY_FACTOR", "10.0"))
    SINR_U_MIN: float = float(os.getenv("NET_SINR_U_MIN", "1e-3"))
    SINR_U_MAX: float = float(os.getenv("NET_SINR_U_MAX", "10.0"))

class AppConfig:
    DEBUG: bool = os.getenv("DEBUG", "false").lower() == "true"
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    API_HOST: str = os.getenv("API_HOST", "0.0.0.0")
    API_PORT: int = int(os.getenv("API_PORT", "8000"))

    # Sweep parallelism cap
    THREADS: int = int(os.getenv("TEAM_ALIGN_THREADS", str(os.cpu_count() or 1)))

    CORS_ALLOWED_ORIGINS: list = os.getenv(
        "CORS_ALLOWED_ORIGINS",
        "http://localhost:3000,http://localhost:5173"
    ).split(",")

class Config:
    solver = SolverDefaults()
    polyhedra = PolyhedraDefaults()
    alignment = AlignmentDefaults()
    mediation = MediationDefaults()
    network = NetworkDefaults()
    app = AppConfig()
