"""
Sweep and mediation runs on the bundled 24-node network.

Four vehicles share one origin-destination pair and the team parameters
(2, 0.3, 10), so the aligned member parameters are (2, 0.6, 10). The
travel-time difference grows as a member setting moves away from that cell;
these tests check the trend, not exact values.
"""
from pathlib import Path

import numpy as np
import pytest

from config import Config
from core.equilibrium import solve_team_optimum
from models.api_models import Scenario
from models.domain_models import DiminishingSchedule, ExperimentGrid
from repositories.problem_repository import ProblemRepository
from services.mediation_service import MediationService
from services.sweep_service import SweepService

pytestmark = [pytest.mark.integration, pytest.mark.slow]

SWEEP_GRID = Path(__file__).resolve().parents[2] / "src" / "data" / "sweep_grid.json"


def _diffs(spec, grid):
    rows = SweepService(threads=4).run(spec, grid)
    assert all(row.status == "ok" for row in rows)
    return rows, [row.travel_time_diff for row in rows]


def _slack(spec):
    optimum = solve_team_optimum(spec)
    return 1e-7 * (1.0 + abs(spec.family.team_cost(spec.team, optimum.point.reshape(spec.N, spec.n))))


class TestBundledSweep:
    """Trends of the travel-time difference"""

    def test_grid_file_loads(self):
        grid = ProblemRepository().load_grid(SWEEP_GRID)
        assert len(grid.cells()) == 64

    def test_aligned_cell_is_consistent(self, bundled_spec):
        """(2, 0.6, 10) reproduces the team optimum"""
        rows, diffs = _diffs(bundled_spec, ExperimentGrid((2.0,), (0.6,), (10.0,)))
        assert rows[0].cr == 1
        assert rows[0].verdict == "ConsistentByIdentity"
        assert abs(diffs[0]) <= _slack(bundled_spec)

    def test_difference_grows_with_alpha(self, bundled_spec):
        """Above the aligned alpha the difference is non-decreasing"""
        _, diffs = _diffs(bundled_spec, ExperimentGrid((2.0, 3.0, 4.0), (0.6,), (10.0,)))
        slack = _slack(bundled_spec)
        assert all(b >= a - slack for a, b in zip(diffs, diffs[1:]))
        assert all(d >= -slack for d in diffs)

    def test_difference_shrinks_with_beta(self, bundled_spec):
        """Raising beta toward the aligned value shrinks the difference"""
        # Stops at 0.6: the difference is V-shaped in beta and grows again past the aligned cell
        _, diffs = _diffs(bundled_spec, ExperimentGrid((2.0,), (0.3, 0.45, 0.6), (10.0,)))
        slack = _slack(bundled_spec)
        assert all(b <= a + slack for a, b in zip(diffs, diffs[1:]))

    def test_misaligned_members_leave_a_gap(self, bundled_spec):
        """The shipped member parameters (gamma 5) are not consistent"""
        rows, diffs = _diffs(bundled_spec, ExperimentGrid((2.0,), (0.3,), (5.0,)))
        assert rows[0].cr == 0
        assert rows[0].gap > 1e-6
        assert np.isfinite(rows[0].closeness_ratio)


class TestBundledMediation:
    """Hypergradient mediation over all adjustable blocks"""

    def test_all_blocks_close_the_gap(self, bundled_spec):
        """The default diminishing schedule reaches a 1e-4 gap within 500 outer steps"""
        report = MediationService().mediate(
            bundled_spec, DiminishingSchedule(Config.mediation.DIMINISHING_C), Scenario.ALL, max_outer_iter=500
        )
        assert report.final_gap <= 1e-4
        assert report.outer_iterations <= 500
        assert bundled_spec.mediator_set.contains(report.theta_final)
