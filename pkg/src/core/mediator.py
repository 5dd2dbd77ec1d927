"""
Bi-level mediation: adjust the members' parameters by theta so that the
equilibrium u(theta) approaches the team optimum u*.

    psi(theta)   = 1/2 ||u(theta) - u*||^2
    omega(theta) = J(theta)' (u(theta) - u*)
    theta       <- Pi_Theta(theta - eta_k omega)
"""

import logging
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import block_diag
from scipy.optimize import lsq_linear

from core.costs import jacobians_of_F, pseudo_grad
from core.equilibrium import ne_jacobian, solve_ne
from core.polyhedra import project, sample_points
from exceptions.solver_exceptions import (
    InfeasibleAdjustmentError,
    MediationDivergenceError,
    PreconditionError,
    SensitivityError,
)
from models.domain_models import (
    FixedSchedule,
    HypergradientResult,
    MediationConfig,
    MediationReport,
    MediatorAdjustment,
    Polyhedron,
    ProblemSpec,
    SolverConfig,
)

logger = logging.getLogger(__name__)


def psi(
    spec: ProblemSpec,
    theta: np.ndarray,
    u_star: np.ndarray,
    cfg: Optional[SolverConfig] = None,
    u0: Optional[np.ndarray] = None,
) -> float:
    """1/2 ||u(theta) - u*||^2 with u(theta) from the inner NE solve."""
    ne = solve_ne(spec, theta, cfg, u0)
    return 0.5 * float(np.sum((ne.point - np.asarray(u_star, dtype=float).reshape(-1)) ** 2))


def hypergradient(
    spec: ProblemSpec,
    theta: np.ndarray,
    u_star: np.ndarray,
    cfg: Optional[SolverConfig] = None,
    u0: Optional[np.ndarray] = None,
) -> HypergradientResult:
    """
    Gradient of psi through the equilibrium map.

    The result carries the equilibrium it was computed at and whether the
    sensitivity used a conservative element of the projection derivative.
    """
    u_star = np.asarray(u_star, dtype=float).reshape(-1)
    ne = solve_ne(spec, theta, cfg, u0)
    sens = ne_jacobian(spec, theta, ne, cfg)
    deviation = ne.point - u_star
    return HypergradientResult(
        omega=sens.J.T @ deviation,
        psi=0.5 * float(deviation @ deviation),
        equilibrium=ne,
        used_conservative_fallback=sens.used_conservative_fallback,
    )


def criticality_residual(theta_set: Polyhedron, theta: np.ndarray, omega: np.ndarray) -> float:
    """||theta - Pi_Theta(theta - omega)||."""
    return float(np.linalg.norm(theta - project(theta_set, theta - omega).point))


def run_mediation(spec: ProblemSpec, u_star: np.ndarray, cfg: Optional[MediationConfig] = None) -> MediationReport:
    """
    Projected hypergradient descent on psi over the mediator set.

    The inner equilibrium solve is warm-started from the previous one and its
    tolerance tightens with the last step length. Stops when the criticality
    residual drops to cfg.tol or after cfg.max_outer_iter updates.

    Raises:
        MediationDivergenceError: If psi grows past divergence_factor times its
            initial value under a fixed stepsize
    """
    cfg = cfg or MediationConfig()
    u_star = np.asarray(u_star, dtype=float).reshape(-1)
    theta_set = spec.mediator_set
    start = spec.zero_theta() if cfg.theta0 is None else np.asarray(cfg.theta0, dtype=float).reshape(-1)
    theta = project(theta_set, start).point

    psi_trace, grad_norms, inner_iters = [], [], []
    fallbacks = 0
    warm = None
    inner_tol = cfg.solver.tol
    converged = False
    crit = np.inf
    gap = float("nan")
    k = 0

    while True:
        inner = replace(cfg.solver, tol=inner_tol)
        step = hypergradient(spec, theta, u_star, inner, warm)
        warm = step.equilibrium.point
        omega = step.omega
        psi_trace.append(step.psi)
        grad_norms.append(float(np.linalg.norm(omega)))
        inner_iters.append(step.equilibrium.iterations)
        fallbacks += int(step.used_conservative_fallback)
        gap = float(np.linalg.norm(warm - u_star))

        crit = criticality_residual(theta_set, theta, omega)
        logger.debug(f"outer {k}: psi={step.psi:.6e} |omega|={grad_norms[-1]:.3e} crit={crit:.3e}")
        if crit <= cfg.tol:
            converged = True
            break
        if k >= cfg.max_outer_iter:
            break
        if (
            isinstance(cfg.schedule, FixedSchedule)
            and psi_trace[0] > 0
            and step.psi > cfg.divergence_factor * psi_trace[0]
        ):
            raise MediationDivergenceError(
                f"psi grew from {psi_trace[0]:.6g} to {step.psi:.6g}; reduce the fixed stepsize"
            )

        eta = cfg.schedule.step(k)
        theta = project(theta_set, theta - eta * omega).point
        inner_tol = max(min(cfg.solver.tol, 1e-2 * eta * grad_norms[-1]), 1e-12)
        k += 1

    logger.info(
        f"mediation {'converged' if converged else 'stopped'} after {k} updates: "
        f"psi={psi_trace[-1]:.6e}, criticality={crit:.3e}"
    )
    return MediationReport(
        theta_final=theta,
        psi_trace=tuple(psi_trace),
        grad_norms=tuple(grad_norms),
        criticality_residual=crit,
        used_conservative_fallback=fallbacks,
        inner_iterations=tuple(inner_iters),
        outer_iterations=k,
        converged=converged,
        schedule=cfg.schedule.describe(),
        final_gap=gap,
    )


def closed_form_adjustment(spec: ProblemSpec, tol: float = 1e-9) -> MediatorAdjustment:
    """
    theta_i = (alpha - alpha_i, 2 beta - beta_i, gamma - gamma_i) for every member.

    Raises:
        PreconditionError: If the family has no closed form
        InfeasibleAdjustmentError: If the adjustment lies outside the mediator set
    """
    aligned = spec.family.aligned_member_params(spec.team)
    adjustment = MediatorAdjustment.from_blocks([
        aligned.shifted(-p.stacked()) for p in spec.members
    ])
    theta_set = spec.mediator_set
    slack = theta_set.slack(adjustment.theta)
    bad = np.flatnonzero(slack < -tol * (1.0 + np.abs(theta_set.b)))
    if bad.size:
        k = int(bad[0])
        raise InfeasibleAdjustmentError(
            f"closed-form adjustment violates mediator inequality row {k} by {-slack[k]:.6g}", constraint=k
        )
    eq_gap = np.abs(theta_set.H @ adjustment.theta - theta_set.m)
    bad = np.flatnonzero(eq_gap > tol * (1.0 + np.abs(theta_set.m)))
    if bad.size:
        k = int(bad[0])
        raise InfeasibleAdjustmentError(
            f"closed-form adjustment violates mediator equality row {k} by {eq_gap[k]:.6g}",
            constraint=theta_set.n_ineq + k,
        )
    return adjustment


def gamma_coordinates(spec: ProblemSpec) -> np.ndarray:
    """Indices of the gamma entries of the stacked theta."""
    dims = spec.dims
    d = dims.total
    return np.concatenate([
        np.arange(i * d + dims.alpha + dims.beta, (i + 1) * d) for i in range(spec.N)
    ]).astype(int)


def extract_affine_ne_map(spec: ProblemSpec, gamma_only: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    u(theta) = P theta + p for gamma-only adjustments on equality-constrained sets.

    Solves the stacked KKT system [[J_u F, H'], [H, 0]] of the game; columns
    of P for non-gamma coordinates are zero.

    Raises:
        PreconditionError: If the family is not quadratic, a set has inequalities,
            or gamma_only is False
        SensitivityError: If the KKT matrix is singular
    """
    if not gamma_only:
        raise PreconditionError("the equilibrium map is affine in theta only for gamma adjustments")
    if not spec.family.is_quadratic:
        raise PreconditionError("affine equilibrium maps need a quadratic family")
    for i, P in enumerate(spec.feasible):
        if P.n_ineq:
            raise PreconditionError(f"feasible set of member {i} has inequality constraints")

    Nn = spec.N * spec.n
    zero = np.zeros(Nn)
    J_uF, J_thetaF = jacobians_of_F(spec, None, zero)
    C = np.zeros_like(J_thetaF)
    cols = gamma_coordinates(spec)
    C[:, cols] = J_thetaF[:, cols]
    H = block_diag(*[P.H for P in spec.feasible]) if any(P.n_eq for P in spec.feasible) else np.zeros((0, Nn))
    m = np.concatenate([P.m for P in spec.feasible])
    r = H.shape[0]

    K = np.block([[J_uF, H.T], [H, np.zeros((r, r))]])
    if np.linalg.cond(K) > 1e12:
        raise SensitivityError("KKT matrix of the game is singular on the constraint subspace")
    rhs_const = np.concatenate([-pseudo_grad(spec, None, zero), m])
    rhs_theta = np.vstack([-C, np.zeros((r, C.shape[1]))])
    solution = np.linalg.solve(K, np.column_stack([rhs_const, rhs_theta]))
    return solution[:Nn, 1:], solution[:Nn, 0]


def _box_view(theta_set: Polyhedron):
    """(free coordinates, lower, upper) when theta_set is a box with some coordinates pinned to zero."""
    dim = theta_set.dim
    if theta_set.is_box:
        return np.arange(dim), theta_set.lower, theta_set.upper
    H, D = theta_set.H, theta_set.D
    unit_rows = lambda M: np.all(np.count_nonzero(M, axis=1) == 1) if M.size else True
    if not (unit_rows(H) and unit_rows(D)) or np.any(theta_set.m != 0):
        return None
    pinned = np.flatnonzero(np.any(H != 0, axis=0))
    free = np.setdiff1d(np.arange(dim), pinned)
    lower = np.full(dim, -np.inf)
    upper = np.full(dim, np.inf)
    for row, rhs in zip(D, theta_set.b):
        k = int(np.flatnonzero(row)[0])
        if row[k] > 0:
            upper[k] = min(upper[k], rhs / row[k])
        else:
            lower[k] = max(lower[k], rhs / row[k])
    return free, lower[free], upper[free]


def affine_optimum(
    P: np.ndarray,
    p: np.ndarray,
    u_star: np.ndarray,
    theta_set: Polyhedron,
    max_iter: int = 100000,
    tol: float = 1e-14,
) -> np.ndarray:
    """
    Global minimizer of 1/2 ||P theta + p - u*||^2 over theta_set.

    Boxes (possibly with pinned coordinates) use bounded least squares; other
    polyhedra use projected gradient with step 1 / ||P||^2.
    """
    target = np.asarray(u_star, dtype=float).reshape(-1) - p
    view = _box_view(theta_set)
    if view is not None:
        free, lower, upper = view
        theta = np.zeros(theta_set.dim)
        if free.size == 0:
            return theta
        A = P[:, free]
        if np.all(np.isinf(lower)) and np.all(np.isinf(upper)):
            theta[free] = np.linalg.lstsq(A, target, rcond=None)[0]
        else:
            theta[free] = lsq_linear(A, target, bounds=(lower, upper), method="bvls", tol=1e-12).x
        return theta

    step = 1.0 / max(np.linalg.norm(P, 2) ** 2, 1e-300)
    theta = project(theta_set, np.zeros(theta_set.dim)).point
    for _ in range(max_iter):
        nxt = project(theta_set, theta - step * P.T @ (P @ theta - target)).point
        if np.linalg.norm(nxt - theta) <= tol * (1.0 + np.linalg.norm(theta)):
            return nxt
        theta = nxt
    logger.warning(f"projected gradient for the affine optimum stopped after {max_iter} steps")
    return theta


def estimate_psi_smoothness(
    spec: ProblemSpec,
    samples: int = 4,
    power_steps: int = 50,
    seed: int = 0,
) -> Tuple[float, bool]:
    """
    Lipschitz constant of grad psi.

    Exact ||P||^2 when the equilibrium map is affine over the mediator set;
    otherwise a power-iteration estimate of max ||J||^2 over sampled theta.

    Returns:
        (nu_psi, exact)
    """
    try:
        P, _ = extract_affine_ne_map(spec)
        view = _box_view(spec.mediator_set)
        gamma = set(gamma_coordinates(spec).tolist())
        if view is not None and set(view[0].tolist()) <= gamma:
            return float(np.linalg.norm(P, 2) ** 2), True
    except (PreconditionError, SensitivityError):
        pass

    rng = np.random.default_rng(seed)
    estimate = 0.0
    for theta in sample_points(spec.mediator_set, samples, rng):
        ne = solve_ne(spec, theta)
        J = ne_jacobian(spec, theta, ne).J
        v = rng.standard_normal(J.shape[1])
        for _ in range(power_steps):
            w = J.T @ (J @ v)
            norm = np.linalg.norm(w)
            if norm == 0:
                break
            v = w / norm
        estimate = max(estimate, float(np.linalg.norm(J @ v) ** 2))
    logger.warning(f"nu_psi estimated heuristically as {estimate:.6g}")
    return estimate, False
