"""
Projected-gradient solvers for Nash equilibria and team optima, and the
fixed-point recursion for the sensitivity of the equilibrium to theta.

Both solvers iterate u <- Pi(u - tau * map(u)) with map = F(theta, .) for the
game and map = G for the team; their fixed points are the NE and the team
optimum respectively.
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag

from config import Config
from core.costs import adjusted_members, as_profile, grad_team, jacobians_of_F, operator_constants, pseudo_grad
from core.polyhedra import project, projection_jacobian_safe
from exceptions.solver_exceptions import NonConvergenceError, SensitivityError
from models.domain_models import (
    EquilibriumResult,
    ProblemSpec,
    ProjectionResult,
    SensitivityMatrix,
    SolutionKind,
    SolverConfig,
)

logger = logging.getLogger(__name__)


def tau_window(kappa: float, nu: float) -> Tuple[float, float]:
    """Open interval of stepsizes for which the projected iteration contracts."""
    return 0.0, 2.0 * kappa / nu**2


def rate_bound(tau: float, kappa: float, nu: float) -> float:
    """Contraction factor sqrt(1 - tau (2 kappa - tau nu^2))."""
    return float(np.sqrt(max(0.0, 1.0 - tau * (2.0 * kappa - tau * nu**2))))


def default_tau(spec: ProblemSpec, theta: Optional[np.ndarray], kind: str) -> Tuple[float, Optional[Tuple[float, float]]]:
    """
    Stepsize for the map named by kind ("F" or "G").

    Certified constants give kappa / nu^2, which minimizes the rate bound.
    Sampled constants give 0.9 * 2 kappa / nu^2. A map that is not monotone
    on the samples falls back to the configured stepsize.

    Returns:
        (tau, (kappa, nu) if certified else None)
    """
    kappa, nu, certified = operator_constants(spec, theta, kind)
    if not kappa > 0:
        logger.warning(
            f"{kind} is not strongly monotone (smallest eigenvalue {kappa:.4g}); "
            f"using fallback stepsize {Config.solver.FALLBACK_TAU}"
        )
        return Config.solver.FALLBACK_TAU, None
    if certified:
        return kappa / nu**2, (kappa, nu)
    logger.warning(f"stepsize for {kind} derived from sampled constants (kappa~{kappa:.4g}, nu~{nu:.4g})")
    return 0.9 * 2.0 * kappa / nu**2, None


def project_profile(spec: ProblemSpec, X: np.ndarray) -> Tuple[np.ndarray, List[ProjectionResult]]:
    """Member-wise projection of an (N, n) profile onto the feasible sets."""
    results = [project(P, X[i]) for i, P in enumerate(spec.feasible)]
    return np.array([r.point for r in results]), results


def _projected_iteration(
    spec: ProblemSpec,
    grad_map: Callable[[np.ndarray], np.ndarray],
    u0: Optional[np.ndarray],
    tau: float,
    cfg: SolverConfig,
    kind: SolutionKind,
    constants: Optional[Tuple[float, float]],
) -> EquilibriumResult:
    U = np.zeros((spec.N, spec.n)) if u0 is None else as_profile(spec, u0).copy()
    U, _ = project_profile(spec, U)

    trace: List[float] = []
    iterates: List[np.ndarray] = []
    window = cfg.stagnation_window
    for iteration in range(cfg.max_iter + 1):
        step, _ = project_profile(spec, U - tau * grad_map(U))
        residual = float(np.linalg.norm(U - step))
        trace.append(residual)
        if cfg.record_trace:
            iterates.append(U.reshape(-1).copy())
        if residual <= cfg.tol:
            logger.debug(f"{kind.value} solve converged in {iteration} iterations (residual {residual:.3e})")
            return EquilibriumResult(
                point=U.reshape(-1).copy(),
                residual=residual,
                iterations=iteration,
                kind=kind,
                tau=tau,
                trace=tuple(trace) if cfg.record_trace else (),
                iterates=tuple(iterates),
                rate_bound=rate_bound(tau, *constants) if constants else None,
            )
        if not np.isfinite(residual):
            raise NonConvergenceError(f"{kind.value} iteration diverged at step {iteration}", trace)
        if window and len(trace) > 2 * window and min(trace[-window:]) >= 0.999 * min(trace[:-window]):
            raise NonConvergenceError(
                f"{kind.value} iteration stagnated: residual {residual:.3e} has not improved in {window} steps",
                trace,
            )
        U = step
    raise NonConvergenceError(
        f"{kind.value} iteration did not reach tol {cfg.tol:g} within {cfg.max_iter} steps", trace
    )


def _resolve_tau(spec, theta, cfg: SolverConfig, kind: str):
    if cfg.tau is None:
        return default_tau(spec, theta, kind)
    kappa, nu, certified = operator_constants(spec, theta, kind)
    if certified and kappa > 0:
        _, upper = tau_window(kappa, nu)
        if cfg.tau >= upper:
            logger.warning(
                f"tau={cfg.tau:g} is outside the contraction window (0, {upper:.6g}); the iteration may not converge"
            )
            return cfg.tau, None
        return cfg.tau, (kappa, nu)
    return cfg.tau, None


def solve_ne(
    spec: ProblemSpec,
    theta: Optional[np.ndarray] = None,
    cfg: Optional[SolverConfig] = None,
    u0: Optional[np.ndarray] = None,
) -> EquilibriumResult:
    """
    Nash equilibrium of the game with member parameters shifted by theta.

    Raises:
        NonConvergenceError: On max_iter exhaustion or stagnation
    """
    cfg = cfg or SolverConfig.from_defaults()
    members = adjusted_members(spec, theta)
    tau, constants = _resolve_tau(spec, theta, cfg, "F")

    def F(U):
        return spec.family.pseudo_grad(members, U)

    return _projected_iteration(spec, F, u0, tau, cfg, SolutionKind.NE, constants)


def solve_team_optimum(
    spec: ProblemSpec,
    cfg: Optional[SolverConfig] = None,
    u0: Optional[np.ndarray] = None,
) -> EquilibriumResult:
    """Team-optimal profile by projected gradient on the team cost."""
    cfg = cfg or SolverConfig.from_defaults()
    tau, constants = _resolve_tau(spec, None, cfg, "G")

    def G(U):
        return spec.family.team_grad(spec.team, U)

    return _projected_iteration(spec, G, u0, tau, cfg, SolutionKind.TEAM_OPT, constants)


def residual_map(spec: ProblemSpec, u) -> np.ndarray:
    """h(u) = u - Pi(u - G(u)); zero exactly at team-optimal points."""
    U = as_profile(spec, u)
    step, _ = project_profile(spec, U - spec.family.team_grad(spec.team, U))
    return (U - step).reshape(-1)


def fixed_point_residual(spec: ProblemSpec, theta: Optional[np.ndarray], u, tau: float) -> float:
    """||u - Pi(u - tau F(theta, u))||."""
    U = as_profile(spec, u)
    step, _ = project_profile(spec, U - tau * pseudo_grad(spec, theta, U).reshape(U.shape))
    return float(np.linalg.norm(U - step))


def team_fixed_point_residual(spec: ProblemSpec, u, tau: float) -> float:
    U = as_profile(spec, u)
    step, _ = project_profile(spec, U - tau * grad_team(spec, U).reshape(U.shape))
    return float(np.linalg.norm(U - step))


def sensitivity_terms(spec: ProblemSpec, theta: Optional[np.ndarray], ne: EquilibriumResult):
    """
    Partial Jacobians of zeta(theta, u) = Pi(u - tau F(theta, u)) at the NE.

    Returns:
        (J_u zeta, J_theta zeta, used_conservative_fallback)
    """
    tau = ne.tau
    U = as_profile(spec, ne.point)
    rho = U - tau * pseudo_grad(spec, theta, U).reshape(U.shape)
    blocks, fallback = [], False
    for i, P in enumerate(spec.feasible):
        J_i, used = projection_jacobian_safe(P, project(P, rho[i]))
        blocks.append(J_i)
        fallback = fallback or used
    J_sigma = block_diag(*blocks)
    J_uF, J_thetaF = jacobians_of_F(spec, theta, U)
    J_u_zeta = J_sigma @ (np.eye(J_uF.shape[0]) - tau * J_uF)
    J_theta_zeta = -tau * J_sigma @ J_thetaF
    if fallback:
        logger.warning("projection is not differentiable at the equilibrium; using a conservative Jacobian element")
    return J_u_zeta, J_theta_zeta, fallback


def ne_jacobian(
    spec: ProblemSpec,
    theta: Optional[np.ndarray],
    ne: EquilibriumResult,
    cfg: Optional[SolverConfig] = None,
) -> SensitivityMatrix:
    """
    Jacobian of the NE map theta -> u(theta) by the recursion
    z <- J_u zeta z + J_theta zeta, started from z = 0.

    Raises:
        SensitivityError: If the recursion does not contract
    """
    cfg = cfg or SolverConfig.from_defaults()
    J_u_zeta, J_theta_zeta, fallback = sensitivity_terms(spec, theta, ne)

    z = np.zeros_like(J_theta_zeta)
    previous = np.inf
    growing = 0
    for p in range(1, cfg.max_iter + 1):
        z_next = J_u_zeta @ z + J_theta_zeta
        diff = float(np.linalg.norm(z_next - z))
        z = z_next
        if diff <= cfg.tol * (1.0 + np.linalg.norm(z)):
            residual = float(np.linalg.norm(J_u_zeta @ z + J_theta_zeta - z))
            logger.debug(f"sensitivity recursion converged in {p} steps (residual {residual:.3e})")
            return SensitivityMatrix(z, True, fallback, residual, p)
        growing = growing + 1 if diff >= previous else 0
        if growing >= 50 or not np.isfinite(diff):
            raise SensitivityError(
                "sensitivity recursion does not contract: the spectral radius of J_u zeta is at least 1"
            )
        previous = diff
    raise SensitivityError(f"sensitivity recursion did not settle within {cfg.max_iter} steps")


def ne_jacobian_direct(spec: ProblemSpec, theta: Optional[np.ndarray], ne: EquilibriumResult) -> SensitivityMatrix:
    """(I - J_u zeta)^{-1} J_theta zeta by a linear solve."""
    J_u_zeta, J_theta_zeta, fallback = sensitivity_terms(spec, theta, ne)
    lhs = np.eye(J_u_zeta.shape[0]) - J_u_zeta
    try:
        J = np.linalg.solve(lhs, J_theta_zeta)
    except np.linalg.LinAlgError as e:
        raise SensitivityError("I - J_u zeta is singular at this equilibrium") from e
    residual = float(np.linalg.norm(J_u_zeta @ J + J_theta_zeta - J))
    return SensitivityMatrix(J, True, fallback, residual, 0)
