import csv
import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from models.domain_models import EquilibriumResult, MediationReport, SweepRow

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRACE_HEADER = ["iter", "psi", "grad_norm", "inner_iters"]
SWEEP_HEADER = ["alpha_i", "beta_i", "gamma_i", "cr", "closeness_ratio", "travel_time_diff", "gap", "status"]


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def report_to_dict(report: MediationReport) -> dict:
    return {key: _plain(value) for key, value in report.__dict__.items()}


def equilibrium_to_dict(result: EquilibriumResult) -> dict:
    return {
        "kind": result.kind.value,
        "point": result.point.tolist(),
        "residual": result.residual,
        "iterations": result.iterations,
        "tau": result.tau,
        "rate_bound": result.rate_bound,
        "trace": list(result.trace),
    }


class TraceRepository:
    """Writes solver results, mediation traces and sweep tables."""

    def export_trace(self, report: MediationReport, path: PathLike, format: str = "csv") -> None:
        """One CSV row per outer iteration, or the full report as JSON."""
        if format == "json":
            self.write_json(report_to_dict(report), path)
            return
        if format != "csv":
            raise ValueError(f"unknown trace format {format!r}; expected csv or json")
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(TRACE_HEADER)
            for k, (psi, grad, inner) in enumerate(zip(report.psi_trace, report.grad_norms, report.inner_iterations)):
                writer.writerow([k, repr(float(psi)), repr(float(grad)), int(inner)])
        logger.info(f"wrote {len(report.psi_trace)} trace rows to {path}")

    def write_equilibrium(self, result: EquilibriumResult, path: PathLike) -> None:
        self.write_json(equilibrium_to_dict(result), path)

    def write_sweep(self, rows: Iterable[SweepRow], path: PathLike) -> int:
        count = 0
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(SWEEP_HEADER)
            for row in rows:
                values = asdict(row)
                writer.writerow([
                    repr(values[key]) if isinstance(values[key], float) else values[key] for key in SWEEP_HEADER
                ])
                count += 1
        logger.info(f"wrote {count} sweep rows to {path}")
        return count

    def write_json(self, payload: dict, path: PathLike) -> None:
        text = json.dumps(payload, indent=2, default=_plain)
        if path in (None, "-"):
            print(text)
            return
        Path(path).write_text(text + "\n", encoding="utf-8")
