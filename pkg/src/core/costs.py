"""
Cost, gradient and Jacobian evaluation on a ProblemSpec.

Profiles may be passed stacked (length N n), as an (N, n) array or as a list
of per-member vectors; results are always stacked vectors.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from config import Config
from core.polyhedra import sample_points
from exceptions.solver_exceptions import DimensionMismatchError, NonMonotoneError
from models.domain_models import MemberParams, ProblemSpec, SmoothnessConstants

logger = logging.getLogger(__name__)


def as_profile(spec: ProblemSpec, u) -> np.ndarray:
    """Coerce u to an (N, n) array, naming the member whose block is malformed."""
    N, n = spec.N, spec.n
    if isinstance(u, (list, tuple)) and u and np.ndim(u[0]) == 1:
        if len(u) != N:
            raise DimensionMismatchError(f"profile has {len(u)} member blocks, expected {N}")
        for i, block in enumerate(u):
            if np.size(block) != n:
                raise DimensionMismatchError(
                    f"member {i} strategy has {np.size(block)} entries, expected {n}", member=i
                )
        return np.asarray(u, dtype=float)
    arr = np.asarray(u, dtype=float)
    if arr.size != N * n:
        member = min(arr.size // n, N - 1) if n else 0
        raise DimensionMismatchError(
            f"profile has {arr.size} entries, expected {N * n}; first incomplete block is member {member}",
            member=member,
        )
    return arr.reshape(N, n)


def adjusted_members(spec: ProblemSpec, theta: Optional[np.ndarray]) -> MemberParams:
    if theta is None:
        return spec.members
    return spec.members.adjusted(np.asarray(theta, dtype=float).reshape(-1))


def eval_team_cost(spec: ProblemSpec, u) -> float:
    return spec.family.team_cost(spec.team, as_profile(spec, u))


def eval_member_cost(spec: ProblemSpec, i: int, theta_i: Optional[np.ndarray], u) -> float:
    """
    Cost of member i under its raw parameters shifted by theta_i.

    Args:
        spec: Problem
        i: Member index (0-based)
        theta_i: Adjustment block of length d, or None for no adjustment
        u: Profile

    Raises:
        DimensionMismatchError: If i is out of range or theta_i has the wrong size
    """
    if not 0 <= i < spec.N:
        raise DimensionMismatchError(f"member index {i} out of range 0..{spec.N - 1}", member=i)
    params = spec.members[i]
    if theta_i is not None:
        theta_i = np.asarray(theta_i, dtype=float).reshape(-1)
        if theta_i.size != spec.dims.total:
            raise DimensionMismatchError(
                f"adjustment for member {i} has {theta_i.size} entries, expected {spec.dims.total}", member=i
            )
        params = params.shifted(theta_i)
    return spec.family.member_cost(i, params, as_profile(spec, u))


def grad_team(spec: ProblemSpec, u) -> np.ndarray:
    return spec.family.team_grad(spec.team, as_profile(spec, u)).reshape(-1)


def pseudo_grad(spec: ProblemSpec, theta: Optional[np.ndarray], u) -> np.ndarray:
    return spec.family.pseudo_grad(adjusted_members(spec, theta), as_profile(spec, u)).reshape(-1)


def jacobians_of_F(spec: ProblemSpec, theta: Optional[np.ndarray], u) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (J_u F, J_theta F) of shapes (N n, N n) and (N n, N d)."""
    members = adjusted_members(spec, theta)
    U = as_profile(spec, u)
    return spec.family.jac_u_pseudo(members, U), spec.family.jac_params_pseudo(members, U)


def jacobian_of_G(spec: ProblemSpec, u) -> np.ndarray:
    return spec.family.jac_u_team(spec.team, as_profile(spec, u))


def _monotonicity_of(J: np.ndarray) -> Tuple[float, float]:
    kappa = float(np.linalg.eigvalsh(0.5 * (J + J.T))[0])
    nu = float(np.linalg.norm(J, 2))
    return kappa, nu


def sample_profiles(spec: ProblemSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """count random feasible profiles, shape (count, N, n)."""
    per_member = [sample_points(P, count, rng) for P in spec.feasible]
    return np.stack(per_member, axis=1)


def operator_constants(
    spec: ProblemSpec,
    theta: Optional[np.ndarray],
    kind: str,
    sample_budget: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[float, float, bool]:
    """
    Strong-monotonicity modulus and Lipschitz constant of G (kind="G") or F (kind="F").

    Exact for quadratic families; for the others the extreme values of the
    Jacobian's symmetric-part eigenvalue and spectral norm over sampled
    feasible profiles, flagged as not certified.

    Returns:
        (kappa, nu, certified)
    """
    members = adjusted_members(spec, theta)

    def jac(U):
        if kind == "G":
            return spec.family.jac_u_team(spec.team, U)
        return spec.family.jac_u_pseudo(members, U)

    if spec.family.is_quadratic:
        kappa, nu = _monotonicity_of(jac(np.zeros((spec.N, spec.n))))
        return kappa, nu, True

    budget = Config.solver.SAMPLE_BUDGET if sample_budget is None else sample_budget
    rng = np.random.default_rng(Config.solver.SEED) if rng is None else rng
    kappa, nu = np.inf, 0.0
    for U in sample_profiles(spec, budget, rng):
        k, v = _monotonicity_of(jac(U))
        kappa, nu = min(kappa, k), max(nu, v)
    logger.debug(f"sampled {kind} constants over {budget} profiles: kappa={kappa:.4g}, nu={nu:.4g}")
    return float(kappa), float(nu), False


def _jacobian_lipschitz(spec: ProblemSpec, theta: np.ndarray, rng: np.random.Generator, budget: int):
    """Lipschitz constants of J_u F in theta and of J_theta F in u."""
    d = theta.size
    U = sample_profiles(spec, 1, rng)[0]
    base_u, base_t = jacobians_of_F(spec, theta, U)

    nu_theta = 0.0
    for k in range(d):
        e = np.zeros(d)
        e[k] = 1.0
        nu_theta += np.linalg.norm(jacobians_of_F(spec, theta + e, U)[0] - base_u) ** 2
    nu_theta = float(np.sqrt(nu_theta))

    nu_u = 0.0
    flat = U.reshape(-1)
    for k in range(flat.size):
        e = np.zeros(flat.size)
        e[k] = 1.0
        nu_u += np.linalg.norm(jacobians_of_F(spec, theta, flat + e)[1] - base_t) ** 2
    nu_u = float(np.sqrt(nu_u))

    if not spec.family.is_quadratic:
        # unit differences are exact only for families linear in (theta, u); sample a few more points
        for U in sample_profiles(spec, max(1, budget // 32), rng):
            J0 = jacobians_of_F(spec, theta, U)
            step = 1e-4
            for k in range(d):
                e = np.zeros(d)
                e[k] = step
                nu_theta = max(nu_theta, np.linalg.norm(jacobians_of_F(spec, theta + e, U)[0] - J0[0]) / step)
            for k in range(U.size):
                e = np.zeros(U.size)
                e[k] = step
                nu_u = max(nu_u, np.linalg.norm(jacobians_of_F(spec, theta, U.reshape(-1) + e)[1] - J0[1]) / step)
    return nu_theta, nu_u


def estimate_constants(
    spec: ProblemSpec,
    theta: Optional[np.ndarray] = None,
    sample_budget: Optional[int] = None,
    seed: Optional[int] = None,
) -> SmoothnessConstants:
    """
    Smoothness constants of G and of F(theta, .).

    Raises:
        NonMonotoneError: If G or F is not strongly monotone (kappa <= 0)
    """
    theta = spec.zero_theta() if theta is None else np.asarray(theta, dtype=float).reshape(-1)
    budget = Config.solver.SAMPLE_BUDGET if sample_budget is None else sample_budget
    rng = np.random.default_rng(Config.solver.SEED if seed is None else seed)

    kappa1, nu1, certified_g = operator_constants(spec, theta, "G", budget, rng)
    if not kappa1 > 0:
        raise NonMonotoneError(f"team gradient map is not strongly monotone (eigenvalue {kappa1:.4g})", kappa1)
    kappa2, nu2, certified_f = operator_constants(spec, theta, "F", budget, rng)
    if not kappa2 > 0:
        raise NonMonotoneError(f"pseudo-gradient is not strongly monotone (eigenvalue {kappa2:.4g})", kappa2)

    nu_theta, nu_u = _jacobian_lipschitz(spec, theta, rng, budget)
    certified = certified_g and certified_f
    if not certified:
        logger.warning("smoothness constants are sampled estimates, not certified bounds")
    return SmoothnessConstants(kappa1, nu1, kappa2, nu2, nu_theta, nu_u, certified)
