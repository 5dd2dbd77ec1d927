from typing import List, Optional, Sequence

import numpy as np


class TeamAlignError(Exception):
    pass


class InputError(TeamAlignError):
    """Bad files, dimensions or configurations. Maps to exit code 1."""
    pass


class NumericalError(TeamAlignError):
    """Solver or certificate failures. Maps to exit code 2."""
    pass


class DimensionMismatchError(InputError):
    def __init__(self, message: str, member: Optional[int] = None):
        super().__init__(message)
        self.member = member


class PolyhedronValidationError(InputError):
    def __init__(self, failures: List[str]):
        super().__init__("; ".join(failures))
        self.failures = list(failures)


class SchemaError(InputError):
    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class NetworkError(InputError):
    pass


class InfeasibleAdjustmentError(InputError):
    def __init__(self, message: str, constraint: Optional[int] = None):
        super().__init__(message)
        self.constraint = constraint


class PreconditionError(InputError):
    pass


class ProjectionError(NumericalError):
    def __init__(self, message: str, best_iterate: Optional[np.ndarray] = None, residual: float = float("nan")):
        super().__init__(message)
        self.best_iterate = best_iterate
        self.residual = residual


class DegenerateActiveSetError(NumericalError):
    pass


class NonMonotoneError(NumericalError):
    def __init__(self, message: str, eigenvalue: float):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NonConvergenceError(NumericalError):
    def __init__(self, message: str, residual_trace: Sequence[float] = ()):
        super().__init__(message)
        self.residual_trace = list(residual_trace)

    @property
    def residual(self) -> float:
        return self.residual_trace[-1] if self.residual_trace else float("nan")


class SensitivityError(NumericalError):
    pass


class BoundViolationError(NumericalError):
    pass


class MediationDivergenceError(NumericalError):
    pass


class ReductionError(NumericalError):
    pass


def exit_code_for(e: BaseException) -> int:
    if isinstance(e, NumericalError):
        return 2
    return 1


def handle_solver_exception(e: Exception):
    from fastapi import HTTPException

    if isinstance(e, InputError):
        raise HTTPException(status_code=422, detail=str(e)) from e

    if isinstance(e, NumericalError):
        raise HTTPException(status_code=500, detail=f"{e.__class__.__name__}: {e}") from e

    raise e
