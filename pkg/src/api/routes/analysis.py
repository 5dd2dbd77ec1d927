import math

import numpy as np
from fastapi import APIRouter
from api.api_constants import *
from exceptions.solver_exceptions import TeamAlignError, handle_solver_exception
from models.api_models import CheckRequest, CheckResponse
from repositories.problem_repository import ProblemRepository
from services.analysis_service import AnalysisService

router = APIRouter()
problem_repository = ProblemRepository()
analysis_service = AnalysisService()


@router.post(CHECK)
def check(request: CheckRequest) -> CheckResponse:
    """
    Consistency verdict and deviation certificate for the problem's member parameters.
    """
    try:
        spec = problem_repository.build_spec(request.problem)
        theta = None if request.theta is None else np.asarray(request.theta, dtype=float)
        report = analysis_service.check(spec, theta)
    except TeamAlignError as e:
        handle_solver_exception(e)
    closeness = report["closeness_ratio"]
    return CheckResponse(
        verdict=report["verdict"],
        cr=report["cr"],
        closeness_ratio=closeness if math.isfinite(closeness) else 0.0,
        evidence=report["evidence"],
        deviation=report["deviation"],
        gap=report["gap"],
    )
