from fastapi import APIRouter
from api.api_constants import *
from exceptions.solver_exceptions import TeamAlignError, handle_solver_exception
from models.api_models import MediateRequest, MediateResponse
from models.domain_models import parse_schedule
from repositories.problem_repository import ProblemRepository
from services.mediation_service import MediationService

router = APIRouter()
problem_repository = ProblemRepository()
mediation_service = MediationService()


@router.post(MEDIATE)
def mediate(request: MediateRequest) -> MediateResponse:
    """
    Run hypergradient mediation on the problem for one adjustment scenario.
    Non-convergence within the iteration cap is reported through `converged`, not an error status.
    """
    try:
        spec = problem_repository.build_spec(request.problem)
        report = mediation_service.mediate(
            spec,
            parse_schedule(request.schedule),
            request.scenario,
            tol=request.tol,
            max_outer_iter=request.max_outer_iter,
        )
    except TeamAlignError as e:
        handle_solver_exception(e)
    return MediateResponse(
        theta_final=report.theta_final.tolist(),
        psi_trace=list(report.psi_trace),
        grad_norms=list(report.grad_norms),
        inner_iterations=list(report.inner_iterations),
        criticality_residual=report.criticality_residual,
        used_conservative_fallback=report.used_conservative_fallback,
        outer_iterations=report.outer_iterations,
        converged=report.converged,
        schedule=report.schedule,
        final_gap=report.final_gap,
    )
