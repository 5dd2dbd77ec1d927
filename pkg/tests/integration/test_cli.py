"""Integration tests for the command-line front end"""
import csv
import json
from pathlib import Path

import pytest

import cli
from repositories.trace_repository import SWEEP_HEADER, TRACE_HEADER

pytestmark = pytest.mark.integration


@pytest.fixture
def affine_path():
    return str(Path(__file__).parents[1] / "fixtures" / "affine_quadratic.json")


class TestSolveCommands:
    """solve-ne, solve-team and check"""

    def test_solve_ne_writes_result(self, affine_path, tmp_path):
        out = tmp_path / "ne.json"
        assert cli.main(["solve-ne", "--problem", affine_path, "--out", str(out)]) == 0
        result = json.loads(out.read_text())
        assert result["kind"] == "NE"
        assert len(result["point"]) == 6
        assert result["residual"] <= 1e-8
        assert len(result["trace"]) == result["iterations"] + 1

    def test_solve_team_to_stdout(self, affine_path, capsys):
        assert cli.main(["solve-team", "--problem", affine_path]) == 0
        result = json.loads(capsys.readouterr().out)
        point = result["point"]
        # one unit of flow per member
        assert sum(point[:3]) == pytest.approx(1.0, abs=1e-8)
        assert sum(point[3:]) == pytest.approx(1.0, abs=1e-8)

    def test_check_reports_verdict(self, affine_path, tmp_path):
        out = tmp_path / "check.json"
        assert cli.main(["check", "--problem", affine_path, "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["cr"] in (0, 1)
        assert report["gap"] >= 0.0
        assert "verdict" in report

    def test_missing_problem_is_input_error(self, tmp_path):
        """Unreadable files exit with 1"""
        assert cli.main(["solve-ne", "--problem", str(tmp_path / "absent.json")]) == 1

    def test_iteration_cap_is_numerical_failure(self, affine_path, tmp_path):
        """Non-convergence exits with 2"""
        code = cli.main([
            "solve-ne", "--problem", affine_path, "--tau", "0.01", "--max-iter", "3", "--out", str(tmp_path / "ne.json"),
        ])
        assert code == 2


class TestMediateAndSweep:
    """mediate and sweep"""

    def test_mediate_writes_trace(self, affine_path, tmp_path):
        out, trace = tmp_path / "report.json", tmp_path / "trace.csv"
        code = cli.main([
            "mediate", "--problem", affine_path, "--scenario", "gamma", "--schedule", "dimin:1.0",
            "--max-outer-iter", "5", "--out", str(out), "--trace", str(trace),
        ])
        assert code in (0, 2)
        report = json.loads(out.read_text())
        with open(trace, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == TRACE_HEADER
        assert len(rows) == report["outer_iterations"] + 2

    def test_unknown_schedule_is_input_error(self, affine_path):
        assert cli.main(["mediate", "--problem", affine_path, "--schedule", "adam:1"]) == 1

    def test_sweep_writes_one_row_per_cell(self, affine_path, small_grid_path, tmp_path):
        out = tmp_path / "sweep.csv"
        code = cli.main([
            "sweep", "--problem", affine_path, "--grid", str(small_grid_path), "--out", str(out), "--threads", "2",
        ])
        assert code == 0
        with open(out, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == SWEEP_HEADER
        assert [row[0] for row in rows[1:]] == ["1.0", "2.0"]
