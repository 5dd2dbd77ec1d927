import logging
from typing import List, Optional

import numpy as np

from config import Config
from core.equilibrium import solve_team_optimum
from core.mediator import estimate_psi_smoothness, run_mediation
from models.api_models import Scenario
from models.domain_models import FixedSchedule, MediationConfig, MediationReport, ProblemSpec, SolverConfig

logger = logging.getLogger(__name__)

# Parameter blocks a scenario leaves adjustable
SCENARIO_BLOCKS = {
    Scenario.ALPHA: ("alpha",),
    Scenario.GAMMA: ("gamma",),
    Scenario.ALPHA_BETA: ("alpha", "beta"),
    Scenario.ALL: ("alpha", "beta", "gamma"),
}


def frozen_coordinates(spec: ProblemSpec, scenario: Scenario) -> List[int]:
    """Theta coordinates pinned to zero under the scenario."""
    dims = spec.dims
    d = dims.total
    spans = {
        "alpha": (0, dims.alpha),
        "beta": (dims.alpha, dims.alpha + dims.beta),
        "gamma": (dims.alpha + dims.beta, d),
    }
    frozen = []
    for name, (lo, hi) in spans.items():
        if name in SCENARIO_BLOCKS[scenario]:
            continue
        for i in range(spec.N):
            frozen.extend(range(i * d + lo, i * d + hi))
    return sorted(frozen)


def restrict_to_scenario(spec: ProblemSpec, scenario: Scenario) -> ProblemSpec:
    """
    Problem whose mediator set only moves the scenario's blocks.

    Raises:
        InfeasibleAdjustmentError: If zero is not allowed for a frozen block
    """
    frozen = frozen_coordinates(spec, scenario)
    return spec.with_mediator_set(spec.mediator_set.with_pinned(frozen))


class MediationService:
    def mediate(
        self,
        spec: ProblemSpec,
        schedule,
        scenario: Scenario = Scenario.ALL,
        tol: Optional[float] = None,
        max_outer_iter: Optional[int] = None,
        solver: Optional[SolverConfig] = None,
    ) -> MediationReport:
        restricted = restrict_to_scenario(spec, scenario)
        solver = solver or SolverConfig.from_defaults()
        optimum = solve_team_optimum(restricted, solver)

        nu_psi = None
        if isinstance(schedule, FixedSchedule):
            estimate, exact = estimate_psi_smoothness(restricted)
            if exact:
                nu_psi = estimate
            else:
                logger.warning(f"fixed stepsize {schedule.eta} is not checked against a certified nu_psi")

        cfg = MediationConfig(
            schedule=schedule,
            solver=solver,
            tol=Config.mediation.OUTER_TOL if tol is None else tol,
            max_outer_iter=Config.mediation.MAX_OUTER_ITER if max_outer_iter is None else max_outer_iter,
            nu_psi=nu_psi,
            divergence_factor=Config.mediation.DIVERGENCE_FACTOR,
        )
        logger.info(
            f"mediating scenario {scenario.value} with {schedule.describe()}; "
            f"{restricted.theta_dim - len(frozen_coordinates(spec, scenario))} adjustable coordinates"
        )
        return run_mediation(restricted, np.asarray(optimum.point), cfg)
