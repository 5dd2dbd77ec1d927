"""Unit tests for problem files, grids and result writers"""
import csv
import json

import numpy as np
import pytest

from config import Config
from core.lqr import build_lqr_reduction
from exceptions.solver_exceptions import SchemaError
from families.quadratic_family import TrafficFamily
from models.domain_models import LqrSpec, MediationReport, Polyhedron, ProblemSpec, SweepRow
from repositories.trace_repository import SWEEP_HEADER, TRACE_HEADER, TraceRepository


def _traffic_doc(arcs):
    return {
        "format_version": 1,
        "family": {"type": "traffic"},
        "network": {"nodes": 4, "arcs": [{"from": a, "to": b} for a, b in arcs]},
        "members": [{"origin": 1, "dest": 4}],
        "team_params": {"alpha": [1.0], "beta": [0.5], "gamma": [1.0]},
        "member_params": [{"alpha": [1.0], "beta": [0.5], "gamma": [1.0]}],
    }


def _sinr_doc(feasible_sets):
    return {
        "format_version": 1,
        "family": {"type": "sinr", "gains": [1.0, 0.8], "noise": 0.5},
        "team_params": {"beta": [1.0], "gamma": [0.2]},
        "member_params": [{"beta": [1.5], "gamma": [0.1]}, {"beta": [0.7], "gamma": [0.3]}],
        "feasible_sets": feasible_sets,
    }


def _write(tmp_path, payload, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture
def report():
    return MediationReport(
        theta_final=np.array([0.1, -0.2]),
        psi_trace=(1.0, 0.5, 0.25),
        grad_norms=(2.0, 1.0, 0.5),
        criticality_residual=0.5,
        used_conservative_fallback=0,
        inner_iterations=(12, 4, 3),
        outer_iterations=2,
        converged=False,
        schedule="fixed:0.5",
        final_gap=0.7,
    )


class TestProblemFiles:
    """Loading and saving problem documents"""

    def test_quadratic_round_trip(self, make_quadratic_spec, problem_repository, tmp_path):
        """A saved quadratic problem loads back unchanged"""
        mediator = Polyhedron.box(np.full(6, -1.0), np.r_[np.full(5, 1.0), np.inf])
        spec = make_quadratic_spec(seed=3, N=2, n=2, mediator_set=mediator)
        path = tmp_path / "quadratic.json"
        problem_repository.save_problem(spec, path)
        loaded = problem_repository.load_problem(path)

        assert np.allclose(loaded.family.Q_basis, spec.family.Q_basis)
        assert np.allclose(loaded.family.B_basis, spec.family.B_basis)
        assert np.allclose(loaded.family.c_basis, spec.family.c_basis)
        assert np.allclose(loaded.members.stacked(), spec.members.stacked())
        assert np.allclose(loaded.feasible[0].upper, 1.0)
        assert np.isinf(loaded.mediator_set.upper[-1])
        assert loaded.name == spec.name

    def test_affine_fixture(self, affine_spec):
        """The fixture has two members on a plane in R^3"""
        assert (affine_spec.N, affine_spec.n) == (2, 3)
        assert affine_spec.feasible[0].n_eq == 1
        assert affine_spec.feasible[0].n_ineq == 0

    def test_bundled_network(self, bundled_spec):
        """Four vehicles on the bundled 24-node network"""
        assert bundled_spec.family.tag == "traffic"
        assert bundled_spec.N == 4
        assert bundled_spec.n == 31
        assert bundled_spec.mediator_set.is_box

    def test_unknown_node_names_field(self, problem_repository, tmp_path):
        """Arc endpoints outside 1..nodes are reported by field path"""
        path = _write(tmp_path, _traffic_doc([(1, 2), (2, 9), (2, 4)]))
        with pytest.raises(SchemaError) as info:
            problem_repository.load_problem(path)
        assert info.value.field == "network.arcs.1.to"

    def test_missing_section_names_field(self, problem_repository, tmp_path):
        doc = _traffic_doc([(1, 2), (2, 4)])
        del doc["team_params"]
        with pytest.raises(SchemaError) as info:
            problem_repository.load_problem(_write(tmp_path, doc))
        assert info.value.field == "team_params"

    def test_traffic_rejects_feasible_sets(self, problem_repository, tmp_path):
        doc = _traffic_doc([(1, 2), (2, 4)])
        doc["feasible_sets"] = [{"lower": [0.0], "upper": [1.0]}]
        with pytest.raises(SchemaError, match="derived from the network"):
            problem_repository.load_problem(_write(tmp_path, doc))

    def test_missing_file(self, problem_repository, tmp_path):
        with pytest.raises(SchemaError, match="cannot read"):
            problem_repository.load_problem(tmp_path / "absent.json")

    def test_invalid_json(self, problem_repository, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\"family\": ", encoding="utf-8")
        with pytest.raises(SchemaError, match="line 1"):
            problem_repository.load_problem(path)

    def test_bundled_network_round_trip(self, bundled_spec, problem_repository, tmp_path):
        """A traffic problem is written back as its network and reloads unchanged"""
        path = tmp_path / "network.json"
        problem_repository.save_problem(bundled_spec, path)
        assert "feasible_sets" not in json.loads(path.read_text())
        loaded = problem_repository.load_problem(path)

        assert loaded.family.tag == "traffic"
        assert loaded.family.network == bundled_spec.family.network
        assert np.allclose(loaded.family.Q_basis, bundled_spec.family.Q_basis)
        assert np.allclose(loaded.family.c_basis, bundled_spec.family.c_basis)
        assert np.allclose(loaded.team.stacked(), bundled_spec.team.stacked())
        assert np.allclose(loaded.members.stacked(), bundled_spec.members.stacked())
        for P, Q in zip(loaded.feasible, bundled_spec.feasible):
            assert np.allclose(P.D, Q.D) and np.allclose(P.b, Q.b)
            assert np.allclose(P.H, Q.H) and np.allclose(P.m, Q.m)
        assert np.allclose(loaded.mediator_set.lower, bundled_spec.mediator_set.lower)
        assert np.allclose(loaded.mediator_set.upper, bundled_spec.mediator_set.upper)
        assert loaded.name == bundled_spec.name

    def test_lqr_reduction_saves_as_quadratic(self, problem_repository, tmp_path):
        """A reduced LQR game reloads as a quadratic problem with the same costs"""
        lqr = LqrSpec(
            A=[[1.0, 0.1], [0.0, 0.9]],
            B=([[0.0], [0.1]], [[0.05], [0.1]]),
            Q_basis=np.eye(2)[None],
            Qf_basis=2.0 * np.eye(2)[None],
            R_basis=np.ones((2, 1, 1, 1)),
            horizon=3,
            x0=[1.0, -0.5],
            team_alpha=[1.0],
            team_beta=[0.5],
            control_bound=2.0,
        )
        spec = build_lqr_reduction(lqr)
        path = tmp_path / "lqr.json"
        problem_repository.save_problem(spec, path)
        loaded = problem_repository.load_problem(path)

        assert loaded.family.tag == "quadratic"
        U = np.random.default_rng(0).normal(size=(2, 3))
        assert loaded.family.team_cost(loaded.team, U) == pytest.approx(spec.family.team_cost(spec.team, U))
        assert np.allclose(loaded.members.stacked(), spec.members.stacked())

    def test_traffic_family_without_network(self, bundled_spec, problem_repository, tmp_path):
        """A traffic family built from arc counts alone has nothing to write"""
        family = TrafficFamily(bundled_spec.n, bundled_spec.N, bundled_spec.family.free_flow)
        spec = ProblemSpec(family, bundled_spec.team, bundled_spec.members, bundled_spec.feasible,
                           bundled_spec.mediator_set)
        with pytest.raises(SchemaError) as info:
            problem_repository.save_problem(spec, tmp_path / "copy.json")
        assert info.value.field == "network"

    def test_sinr_powers_below_floor(self, problem_repository, tmp_path):
        """A transmit power box reaching below the configured floor is rejected"""
        doc = _sinr_doc([{"lower": [1e-3], "upper": [10.0]}, {"lower": [0.0], "upper": [10.0]}])
        with pytest.raises(SchemaError, match="below") as info:
            problem_repository.load_problem(_write(tmp_path, doc))
        assert info.value.field == "feasible_sets.1"

    def test_sinr_missing_bounds_take_limits(self, problem_repository, tmp_path):
        doc = _sinr_doc([{"lower": [None], "upper": [None]}, {"lower": [0.5], "upper": [None]}])
        spec = problem_repository.load_problem(_write(tmp_path, doc))
        assert np.allclose(spec.feasible[0].lower, Config.network.SINR_U_MIN)
        assert np.allclose(spec.feasible[0].upper, Config.network.SINR_U_MAX)
        assert np.allclose(spec.feasible[1].lower, 0.5)

    def test_sinr_sets_must_be_boxes(self, problem_repository, tmp_path):
        doc = _sinr_doc([{"lower": [0.1], "upper": [1.0]}, {"D": [[1.0]], "b": [1.0]}])
        with pytest.raises(SchemaError, match="boxes") as info:
            problem_repository.load_problem(_write(tmp_path, doc))
        assert info.value.field == "feasible_sets.1"


class TestThetaAndGrid:
    """Adjustment vectors and sweep grids"""

    def test_theta_forms(self, problem_repository, tmp_path):
        """A bare list and a {"theta": [...]} object are both accepted"""
        bare = _write(tmp_path, [0.0, 1.0, 2.0], "bare.json")
        wrapped = _write(tmp_path, {"theta": [0.0, 1.0, 2.0]}, "wrapped.json")
        assert np.allclose(problem_repository.load_theta(bare, 3), [0.0, 1.0, 2.0])
        assert np.allclose(problem_repository.load_theta(wrapped, 3), [0.0, 1.0, 2.0])

    def test_theta_size_checked(self, problem_repository, tmp_path):
        with pytest.raises(SchemaError) as info:
            problem_repository.load_theta(_write(tmp_path, [1.0, 2.0], "theta.json"), 3)
        assert info.value.field == "theta"

    def test_grid(self, problem_repository, small_grid_path):
        grid = problem_repository.load_grid(small_grid_path)
        assert grid.cells() == [(1.0, 0.5, 1.0), (2.0, 0.5, 1.0)]
        assert grid.vary_in_unison


class TestTraceRepository:
    """Mediation traces and sweep tables"""

    def test_trace_csv(self, report, tmp_path):
        """One row per outer iteration with exact floats"""
        path = tmp_path / "trace.csv"
        TraceRepository().export_trace(report, path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == TRACE_HEADER
        assert len(rows) == 4
        assert rows[2] == ["1", "0.5", "1.0", "4"]

    def test_trace_json(self, report, tmp_path):
        path = tmp_path / "trace.json"
        TraceRepository().export_trace(report, path, format="json")
        payload = json.loads(path.read_text())
        assert payload["theta_final"] == [0.1, -0.2]
        assert payload["psi_trace"] == [1.0, 0.5, 0.25]
        assert payload["converged"] is False

    def test_unknown_trace_format(self, report, tmp_path):
        with pytest.raises(ValueError):
            TraceRepository().export_trace(report, tmp_path / "trace.xml", format="xml")

    def test_sweep_csv(self, tmp_path):
        rows = [
            SweepRow(1.0, 0.3, 10.0, cr=1, closeness_ratio=1.0, travel_time_diff=0.0, gap=0.0),
            SweepRow(2.0, 0.3, 10.0, status="NonConvergenceError"),
        ]
        path = tmp_path / "sweep.csv"
        assert TraceRepository().write_sweep(rows, path) == 2
        with open(path, newline="") as f:
            table = list(csv.reader(f))
        assert table[0] == SWEEP_HEADER
        assert table[1][:4] == ["1.0", "0.3", "10.0", "1"]
        assert table[2][-1] == "NonConvergenceError"
        assert table[2][4] == "nan"

    def test_json_to_stdout(self, capsys):
        TraceRepository().write_json({"a": np.float64(1.5)}, "-")
        assert json.loads(capsys.readouterr().out) == {"a": 1.5}
