import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from config import Config
from core.alignment import certify_consistency, deviation_bound
from core.costs import eval_team_cost
from core.equilibrium import solve_ne, solve_team_optimum
from exceptions.solver_exceptions import NonMonotoneError, TeamAlignError
from models.domain_models import (
    EquilibriumResult,
    ExperimentGrid,
    MemberParams,
    ProblemSpec,
    SolverConfig,
    SweepRow,
    TeamParams,
)

logger = logging.getLogger(__name__)

SPOT_CHECKS = 5


class SweepService:
    """Runs every cell of a member-parameter grid and reports consistency and costs."""

    def __init__(self, threads: Optional[int] = None):
        self.threads = max(1, threads or Config.app.THREADS)

    def run(self, spec: ProblemSpec, grid: ExperimentGrid, cfg: Optional[SolverConfig] = None) -> List[SweepRow]:
        cfg = cfg or SolverConfig.from_defaults()
        optimum = solve_team_optimum(spec, cfg)
        cells = grid.cells()
        logger.info(f"sweeping {len(cells)} cells on {self.threads} threads")

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            # map keeps grid order whatever the completion order
            rows = list(pool.map(lambda cell: self._run_cell(spec, grid, cell, optimum, cfg), cells))

        self._spot_check(spec, grid, rows, cells, optimum, cfg)
        failed = sum(row.status != "ok" for row in rows)
        logger.info(f"sweep finished: {len(rows) - failed} ok, {failed} failed")
        return rows

    def cell_spec(self, spec: ProblemSpec, grid: ExperimentGrid, cell: Tuple[float, float, float]) -> ProblemSpec:
        dims = spec.dims
        params = TeamParams(
            np.full(dims.alpha, cell[0]), np.full(dims.beta, cell[1]), np.full(dims.gamma, cell[2])
        )
        if grid.vary_in_unison:
            members = MemberParams.uniform(params, spec.N)
        else:
            members = MemberParams((params,) + tuple(spec.members)[1:])
        return spec.with_member_params(members)

    def _run_cell(self, spec, grid, cell, optimum: EquilibriumResult, cfg: SolverConfig) -> SweepRow:
        alpha, beta, gamma = cell
        try:
            cell_spec = self.cell_spec(spec, grid, cell)
            ne = solve_ne(cell_spec, None, cfg)
            verdict = certify_consistency(cell_spec, ne)
            try:
                closeness = deviation_bound(cell_spec, ne, u_star=optimum.point).closeness_ratio
            except NonMonotoneError:
                closeness = float("nan")
            cost_ne = eval_team_cost(cell_spec, ne.point)
            cost_opt = eval_team_cost(cell_spec, optimum.point)
            gap = float(np.linalg.norm(ne.point - optimum.point))
            status = "ok"
            if verdict.cr and gap > 1e-6 * (1.0 + np.linalg.norm(optimum.point)):
                status = "consistent-but-gap"
            return SweepRow(
                alpha, beta, gamma,
                cr=verdict.cr,
                closeness_ratio=closeness,
                travel_time_diff=cost_ne - cost_opt,
                gap=gap,
                status=status,
                verdict=verdict.verdict.value,
                team_cost_ne=cost_ne,
                team_cost_opt=cost_opt,
            )
        except TeamAlignError as e:
            logger.warning(f"cell ({alpha}, {beta}, {gamma}) failed: {e}")
            return SweepRow(alpha, beta, gamma, status=e.__class__.__name__)

    def _spot_check(self, spec, grid, rows: List[SweepRow], cells, optimum: EquilibriumResult, cfg) -> None:
        """Re-solves a few ok cells from a different start and flags disagreements."""
        ok = [k for k, row in enumerate(rows) if row.status == "ok"]
        if not ok:
            return
        rng = np.random.default_rng(Config.solver.SEED)
        picked = rng.choice(ok, size=min(SPOT_CHECKS, len(ok)), replace=False)
        for k in sorted(int(k) for k in picked):
            cell_spec = self.cell_spec(spec, grid, cells[k])
            try:
                again = solve_ne(cell_spec, None, cfg, u0=optimum.point)
            except TeamAlignError as e:
                logger.warning(f"spot check of cell {k} failed: {e}")
                continue
            gap = float(np.linalg.norm(again.point - optimum.point))
            if abs(gap - rows[k].gap) > 1e-6 * (1.0 + rows[k].gap):
                logger.warning(f"spot check of cell {k}: gap {gap:.6g} differs from {rows[k].gap:.6g}")
                rows[k] = SweepRow(**{**rows[k].__dict__, "status": "spot-check-mismatch"})
