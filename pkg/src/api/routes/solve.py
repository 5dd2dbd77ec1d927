import numpy as np
from fastapi import APIRouter
from api.api_constants import *
from exceptions.solver_exceptions import TeamAlignError, handle_solver_exception
from models.api_models import SolveRequest, SolveResponse
from models.domain_models import EquilibriumResult, SolutionKind, SolverConfig
from repositories.problem_repository import ProblemRepository
from services.analysis_service import AnalysisService

router = APIRouter()
problem_repository = ProblemRepository()
analysis_service = AnalysisService()


def _to_response(result: EquilibriumResult) -> SolveResponse:
    return SolveResponse(
        kind=result.kind.value,
        point=result.point.tolist(),
        residual=result.residual,
        iterations=result.iterations,
        tau=result.tau,
        rate_bound=result.rate_bound,
    )


def _solve(request: SolveRequest, kind: SolutionKind) -> SolveResponse:
    try:
        spec = problem_repository.build_spec(request.problem)
        theta = None if request.theta is None else np.asarray(request.theta, dtype=float)
        cfg = SolverConfig.from_defaults(tau=request.tau, tol=request.tol, max_iter=request.max_iter)
        return _to_response(analysis_service.solve(spec, kind, theta, cfg))
    except TeamAlignError as e:
        handle_solver_exception(e)


@router.post(SOLVE_NE)
def solve_ne(request: SolveRequest) -> SolveResponse:
    """
    Nash equilibrium of the problem, optionally with member parameters shifted by theta.
    """
    return _solve(request, SolutionKind.NE)


@router.post(SOLVE_TEAM)
def solve_team(request: SolveRequest) -> SolveResponse:
    """
    Team-optimal profile of the problem.
    """
    return _solve(request, SolutionKind.TEAM_OPT)
