"""
Command-line front end.

    solve-ne / solve-team   one solve, EquilibriumResult as JSON
    check                   consistency verdict and deviation certificate
    mediate                 hypergradient mediation for one scenario
    sweep                   member-parameter grid, one CSV row per cell

Exit codes: 0 success, 1 input error, 2 numerical failure or non-convergence.
Logs go to stderr; results go to --out or stdout.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict
from typing import List, Optional

from config import Config
from exceptions.solver_exceptions import TeamAlignError, exit_code_for
from models.api_models import Scenario
from models.domain_models import SolutionKind, SolverConfig, parse_schedule
from repositories.problem_repository import BUNDLED_PROBLEM, ProblemRepository
from repositories.trace_repository import TraceRepository, equilibrium_to_dict, report_to_dict
from services.analysis_service import AnalysisService
from services.mediation_service import MediationService
from services.sweep_service import SweepService

logger = logging.getLogger("team_align.cli")


def _solver_config(args) -> SolverConfig:
    return SolverConfig.from_defaults(
        tau=getattr(args, "tau", None),
        tol=getattr(args, "tol", None),
        max_iter=getattr(args, "max_iter", None),
    )


def _load(args):
    problems = ProblemRepository()
    spec = problems.load_problem(args.problem)
    theta = None
    if getattr(args, "theta", None):
        theta = problems.load_theta(args.theta, spec.theta_dim)
    return spec, theta


def cmd_solve(args, kind: SolutionKind) -> int:
    spec, theta = _load(args)
    result = AnalysisService().solve(spec, kind, theta, _solver_config(args))
    TraceRepository().write_json(equilibrium_to_dict(result), args.out)
    return 0


def cmd_check(args) -> int:
    spec, theta = _load(args)
    report = AnalysisService().check(spec, theta, _solver_config(args))
    TraceRepository().write_json(report, args.out)
    return 0


def cmd_mediate(args) -> int:
    spec, _ = _load(args)
    report = MediationService().mediate(
        spec,
        parse_schedule(args.schedule),
        Scenario(args.scenario),
        tol=args.tol,
        max_outer_iter=args.max_outer_iter,
        solver=SolverConfig.from_defaults(),
    )
    traces = TraceRepository()
    traces.write_json(report_to_dict(report), args.out)
    if args.trace:
        traces.export_trace(report, args.trace, "csv")
    if not report.converged:
        logger.error(
            f"mediation stopped after {report.outer_iterations} updates with criticality "
            f"{report.criticality_residual:.3e} > tol"
        )
        return 2
    return 0


def cmd_sweep(args) -> int:
    problems = ProblemRepository()
    spec = problems.load_problem(args.problem)
    grid = problems.load_grid(args.grid)
    rows = SweepService(args.threads).run(spec, grid, _solver_config(args))
    traces = TraceRepository()
    if args.format == "json":
        traces.write_json({"rows": [asdict(row) for row in rows]}, args.out)
    else:
        traces.write_sweep(rows, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="team-align", description="Team/game alignment toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_problem(p):
        p.add_argument("--problem", default=str(BUNDLED_PROBLEM), help="problem file (default: bundled network)")

    def add_solver(p):
        p.add_argument("--tau", type=float, default=None, help="fixed stepsize (default: from constants)")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None)

    for name, help_text in (("solve-ne", "Nash equilibrium"), ("solve-team", "team optimum")):
        p = sub.add_parser(name, help=help_text)
        add_problem(p)
        add_solver(p)
        if name == "solve-ne":
            p.add_argument("--theta", default=None, help="JSON file with the adjustment vector")
        p.add_argument("--out", default="-")

    p = sub.add_parser("check", help="consistency verdict and deviation bound")
    add_problem(p)
    p.add_argument("--theta", default=None)
    p.add_argument("--out", default="-")

    p = sub.add_parser("mediate", help="hypergradient mediation")
    add_problem(p)
    p.add_argument("--schedule", default=f"dimin:{Config.mediation.DIMINISHING_C!r}")
    p.add_argument("--scenario", choices=[s.value for s in Scenario], default=Scenario.ALL.value)
    p.add_argument("--tol", type=float, default=None, help="criticality tolerance")
    p.add_argument("--max-outer-iter", type=int, default=None)
    p.add_argument("--out", default="-")
    p.add_argument("--trace", default=None, help="CSV file for the per-iteration trace")

    p = sub.add_parser("sweep", help="member-parameter grid")
    add_problem(p)
    add_solver(p)
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--threads", type=int, default=None)
    return parser


COMMANDS = {
    "solve-ne": lambda args: cmd_solve(args, SolutionKind.NE),
    "solve-team": lambda args: cmd_solve(args, SolutionKind.TEAM_OPT),
    "check": cmd_check,
    "mediate": cmd_mediate,
    "sweep": cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, Config.app.LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except TeamAlignError as e:
        code = exit_code_for(e)
        logger.error(f"{e.__class__.__name__}: {e}")
        return code
    except ValueError as e:
        logger.error(str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
