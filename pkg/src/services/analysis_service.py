import logging
from typing import Any, Dict, Optional

import numpy as np

from core.alignment import certify_consistency, deviation_bound
from core.costs import eval_team_cost
from core.equilibrium import solve_ne, solve_team_optimum
from exceptions.solver_exceptions import NonMonotoneError
from models.domain_models import EquilibriumResult, ProblemSpec, SolutionKind, SolverConfig

logger = logging.getLogger(__name__)


class AnalysisService:
    """Single solves and the consistency / deviation report for one parameter setting."""

    def solve(
        self,
        spec: ProblemSpec,
        kind: SolutionKind,
        theta: Optional[np.ndarray] = None,
        cfg: Optional[SolverConfig] = None,
    ) -> EquilibriumResult:
        if kind == SolutionKind.NE:
            result = solve_ne(spec, theta, cfg)
        else:
            result = solve_team_optimum(spec, cfg)
        logger.info(
            f"{kind.value}: residual {result.residual:.3e} after {result.iterations} iterations (tau={result.tau:.6g})"
        )
        return result

    def check(
        self,
        spec: ProblemSpec,
        theta: Optional[np.ndarray] = None,
        cfg: Optional[SolverConfig] = None,
        u_star: Optional[EquilibriumResult] = None,
    ) -> Dict[str, Any]:
        """
        Consistency verdict, deviation certificate and the realized gap.

        Returns:
            Dict with verdict, cr, closeness_ratio, evidence, deviation, gap,
            team costs at both solutions and the two points
        """
        ne = solve_ne(spec, theta, cfg)
        optimum = u_star or solve_team_optimum(spec, cfg)
        verdict = certify_consistency(spec, ne, theta)

        deviation = None
        try:
            deviation = deviation_bound(spec, ne, theta, u_star=optimum.point)
        except NonMonotoneError as e:
            logger.warning(f"no deviation bound: {e}")

        gap = float(np.linalg.norm(ne.point - optimum.point))
        cost_ne = eval_team_cost(spec, ne.point)
        cost_opt = eval_team_cost(spec, optimum.point)
        logger.info(f"verdict {verdict.verdict.value}, gap {gap:.3e}")
        return {
            "verdict": verdict.verdict.value,
            "cr": verdict.cr,
            "closeness_ratio": deviation.closeness_ratio if deviation else float("nan"),
            "evidence": [e.to_dict() for e in verdict.evidence],
            "tolerances": dict(verdict.tolerances),
            "deviation": None if deviation is None else deviation.__dict__.copy(),
            "gap": gap,
            "team_cost_ne": cost_ne,
            "team_cost_opt": cost_opt,
            "ne": ne.point.tolist(),
            "team_optimum": optimum.point.tolist(),
        }
