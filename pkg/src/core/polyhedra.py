"""
Euclidean projection onto polyhedra and its generalized derivative.

Projection solves min 1/2 ||y - x||^2 s.t. D y <= b, H y = m with a dual
active-set method (identity Hessian). Starting from the unconstrained
minimizer, violated inequalities are added one at a time; blocking
constraints whose multipliers would turn negative are dropped on the way.
"""

import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import orth
from scipy.optimize import linprog

from config import Config
from exceptions.solver_exceptions import (
    DegenerateActiveSetError,
    PolyhedronValidationError,
    ProjectionError,
)
from models.domain_models import Polyhedron, ProjectionResult, ValidationCertificate

logger = logging.getLogger(__name__)


def project(
    P: Polyhedron,
    x: np.ndarray,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> ProjectionResult:
    """
    Project x onto P.

    Args:
        P: Target polyhedron
        x: Point of dimension P.dim
        tol: Feasibility tolerance (relative to row scale)
        max_iter: Cap on active-set changes

    Returns:
        ProjectionResult with point, active set and multipliers

    Raises:
        ProjectionError: If P is empty or the iteration cap is hit
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    tol = Config.polyhedra.QP_TOL if tol is None else tol
    max_iter = Config.polyhedra.QP_MAX_ITER if max_iter is None else max_iter

    if P.is_box:
        return _project_box(P, x)
    return _project_dual_active_set(P, x, tol, max_iter)


def _finish(P: Polyhedron, y: np.ndarray, active, lam: np.ndarray, mu: np.ndarray, iterations: int):
    margin = Config.polyhedra.SMOOTH_MARGIN
    slack = P.slack(y)
    tight = np.flatnonzero(slack <= margin * (1.0 + np.abs(P.b)))
    weak = np.flatnonzero((lam <= margin) & (slack <= margin * (1.0 + np.abs(P.b))))
    return ProjectionResult(
        point=y,
        active_set=tuple(sorted(int(k) for k in active)),
        multipliers=lam,
        eq_multipliers=mu,
        is_smooth_point=weak.size == 0,
        tight_set=tuple(int(k) for k in tight),
        iterations=iterations,
    )


def _project_box(P: Polyhedron, x: np.ndarray) -> ProjectionResult:
    y = np.clip(x, P.lower, P.upper)
    coords, is_upper = P.box_row_bounds()
    excess = np.where(is_upper, x[coords] - P.upper[coords], P.lower[coords] - x[coords])
    lam = np.maximum(excess, 0.0)
    active = np.flatnonzero(lam > 0)
    return _finish(P, y, active, lam, np.zeros(0), 0)


def _project_dual_active_set(P: Polyhedron, x: np.ndarray, tol: float, max_iter: int) -> ProjectionResult:
    D, b, H, m = P.D, P.b, P.H, P.m
    n_eq = P.n_eq
    y = x.copy()
    if n_eq:
        mu = np.linalg.solve(H @ H.T, H @ x - m)
        y = x - H.T @ mu
    else:
        mu = np.zeros(0)

    working = []                      # inequality rows in the working set, in insertion order
    v = mu.copy()                     # multipliers of [H rows, working rows]
    lam = np.zeros(P.n_ineq)
    row_scale = np.linalg.norm(D, axis=1) if P.n_ineq else np.zeros(0)
    iterations = 0

    while True:
        viol = D @ y - b
        threshold = tol * np.maximum(1.0, np.abs(b) + row_scale * np.linalg.norm(y))
        candidates = [k for k in np.flatnonzero(viol > threshold) if k not in working]
        if not candidates:
            break
        p = int(candidates[0])
        n_p = D[p]
        lam_p = 0.0

        while True:
            iterations += 1
            if iterations > max_iter:
                raise ProjectionError(
                    f"projection did not settle within {max_iter} active-set changes",
                    best_iterate=y.copy(),
                    residual=float(np.max(np.maximum(D @ y - b, 0.0), initial=0.0)),
                )
            N = np.vstack([H, D[working]]) if working or n_eq else np.zeros((0, P.dim))
            if N.shape[0]:
                r = np.linalg.lstsq(N @ N.T, N @ n_p, rcond=None)[0]
                z = n_p - N.T @ r
            else:
                r = np.zeros(0)
                z = n_p.copy()

            zz = float(z @ z)
            current = float(n_p @ y - b[p])
            t2 = current / zz if zz > 1e-14 * max(1.0, float(n_p @ n_p)) else np.inf

            t1, block = np.inf, None
            for pos, k in enumerate(working):
                rj = r[n_eq + pos]
                if rj > 1e-14:
                    ratio = v[n_eq + pos] / rj
                    if ratio < t1:
                        t1, block = ratio, pos

            if np.isinf(t1) and np.isinf(t2):
                raise ProjectionError(
                    f"polyhedron is empty: inequality row {p} cannot be satisfied",
                    best_iterate=y.copy(),
                    residual=current,
                )

            if t2 <= t1:
                y = y - t2 * z
                v = np.concatenate([v - t2 * r, [lam_p + t2]])
                working.append(p)
                break

            # partial step: drop the blocking row and keep going on p
            if np.isfinite(t2):
                y = y - t1 * z
            v = v - t1 * r
            lam_p += t1
            logger.debug(f"dropping row {working[block]} while adding row {p}")
            v = np.delete(v, n_eq + block)
            del working[block]

    mu = v[:n_eq]
    for pos, k in enumerate(working):
        lam[k] = max(v[n_eq + pos], 0.0)
    return _finish(P, y, working, lam, mu, iterations)


def _constraint_rows(P: Polyhedron, rows) -> np.ndarray:
    rows = list(rows)
    return np.vstack([P.H, P.D[rows]]) if rows else P.H


def projection_jacobian(P: Polyhedron, result: ProjectionResult) -> np.ndarray:
    """
    Derivative of the projection at a smooth point: I - R' (R R')^{-1} R over the
    equality rows and the active inequality rows.

    Raises:
        DegenerateActiveSetError: If the point has a weakly active constraint
    """
    if not result.is_smooth_point:
        raise DegenerateActiveSetError(
            "projection is not differentiable here: some tight constraint has a zero multiplier"
        )
    R = _constraint_rows(P, result.active_set)
    I = np.eye(P.dim)
    if R.shape[0] == 0:
        return I
    return I - R.T @ np.linalg.solve(R @ R.T, R)


def projection_jacobian_conservative(P: Polyhedron, result: ProjectionResult) -> np.ndarray:
    """Element of the generalized derivative treating every tight row as active."""
    R = _constraint_rows(P, result.tight_set)
    I = np.eye(P.dim)
    if R.shape[0] == 0:
        return I
    U = orth(R.T)
    return I - U @ U.T


def projection_jacobian_safe(P: Polyhedron, result: ProjectionResult) -> Tuple[np.ndarray, bool]:
    """Returns (Jacobian, used_conservative_fallback)."""
    if result.is_smooth_point:
        return projection_jacobian(P, result), False
    return projection_jacobian_conservative(P, result), True


def _lp(P: Polyhedron, c: np.ndarray, extra_col: Optional[np.ndarray] = None, cap: Optional[float] = None):
    n = P.dim
    A_ub = P.D if P.n_ineq else None
    A_eq = P.H if P.n_eq else None
    bounds = [(None, None)] * n
    if extra_col is not None:
        A_ub = np.hstack([P.D, extra_col[:, None]])
        A_eq = np.hstack([P.H, np.zeros((P.n_eq, 1))]) if P.n_eq else None
        bounds = bounds + [(None, cap)]
    return linprog(
        c,
        A_ub=A_ub,
        b_ub=P.b if P.n_ineq else None,
        A_eq=A_eq,
        b_eq=P.m if P.n_eq else None,
        bounds=bounds,
        method="highs",
    )


def validate(P: Polyhedron, require_compact: bool = True) -> ValidationCertificate:
    """
    Check the standing assumptions on a feasible set: well-formed rows, a
    relative Slater point and, unless disabled, compactness.

    Raises:
        PolyhedronValidationError: Listing every failed check
    """
    failures = []
    rank_tol = Config.polyhedra.RANK_TOL
    n = P.dim

    norms = np.linalg.norm(P.D, axis=1)
    for k in np.flatnonzero(norms <= rank_tol):
        failures.append(f"inequality row {int(k)} is zero")
    if P.n_ineq:
        scaled = np.hstack([P.D, P.b[:, None]]) / np.maximum(norms, rank_tol)[:, None]
        _, first = np.unique(np.round(scaled, 12), axis=0, return_index=True)
        for k in sorted(set(range(P.n_ineq)) - set(first.tolist())):
            failures.append(f"inequality row {int(k)} duplicates another row")

    if P.n_eq and np.linalg.matrix_rank(P.H, tol=rank_tol) < P.n_eq:
        failures.append("equality matrix H does not have full row rank")

    slater_point = np.full(n, np.nan)
    margin = 0.0
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    compact = False
    empty = False

    if P.n_ineq:
        c = np.zeros(n + 1)
        c[-1] = -1.0
        res = _lp(P, c, extra_col=np.maximum(norms, rank_tol), cap=1.0)
        if res.status == 2:
            failures.append("polyhedron is empty")
            empty = True
        elif res.status == 0:
            slater_point, margin = res.x[:n], float(res.x[-1])
            if margin <= rank_tol:
                failures.append(f"no Slater point: largest inequality margin is {margin:.3e}")
        else:
            failures.append(f"Slater program failed: {res.message}")
    elif P.n_eq:
        slater_point = np.linalg.lstsq(P.H, P.m, rcond=None)[0]
        margin = 1.0
        if np.linalg.norm(P.H @ slater_point - P.m) > 1e-8 * (1.0 + np.linalg.norm(P.m)):
            failures.append("equality constraints are inconsistent")
            empty = True
    else:
        slater_point, margin = np.zeros(n), 1.0

    if not empty:
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            lo = _lp(P, e)
            hi = _lp(P, -e)
            if lo.status == 0:
                lower[k] = lo.fun
            if hi.status == 0:
                upper[k] = -hi.fun
        compact = bool(np.all(np.isfinite(lower)) and np.all(np.isfinite(upper)))
        if require_compact and not compact:
            open_coords = np.flatnonzero(~(np.isfinite(lower) & np.isfinite(upper))).tolist()
            failures.append(f"polyhedron is unbounded along coordinates {open_coords}")

    if failures:
        logger.debug(f"polyhedron validation failed: {failures}")
        raise PolyhedronValidationError(failures)

    return ValidationCertificate(
        slater_point=slater_point,
        slater_margin=margin,
        lower_support=lower,
        upper_support=upper,
        compact=compact,
    )


@lru_cache(maxsize=256)
def _sampling_frame(P: Polyhedron) -> Tuple[np.ndarray, np.ndarray]:
    """Interior point and per-coordinate spread used to scatter samples over P."""
    try:
        cert = validate(P, require_compact=False)
        center = cert.slater_point
        width = cert.upper_support - cert.lower_support
        spread = np.where(np.isfinite(width), width, 1.0)
    except PolyhedronValidationError:
        center = project(P, np.zeros(P.dim)).point
        spread = np.ones(P.dim)
    return center, np.maximum(spread, 1e-6)


def sample_points(P: Polyhedron, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random points of P obtained by projecting Gaussian perturbations of an interior point."""
    center, spread = _sampling_frame(P)
    return np.array([
        project(P, center + spread * rng.standard_normal(P.dim)).point for _ in range(count)
    ])
