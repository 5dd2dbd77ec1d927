from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from api.api_constants import API_PREFIX
from api.routes import analysis, mediation, solve
from config import Config

app = FastAPI(
    title="Team Align API",
    description="Nash equilibria, team optima, consistency certificates and mediation for parameterized team problems",
    version="1.0.0"
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=Config.app.CORS_ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(solve.router, prefix=API_PREFIX, tags=["solve"])
app.include_router(analysis.router, prefix=API_PREFIX, tags=["analysis"])
app.include_router(mediation.router, prefix=API_PREFIX, tags=["mediation"])

@app.get("/")
def read_root():
    return {
        "message": "Team Align API",
        "version": "1.0.0",
        "docs": "/docs"
    }

@app.get("/health")
def health_check():
    return {"status": "healthy"}

if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host=Config.app.API_HOST, port=Config.app.API_PORT)
