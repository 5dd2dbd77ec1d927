"""
Certificates relating the Nash equilibrium of a game to the team optimum.

- potential condition: member gradients equal the team gradient everywhere
- one-dimensional sign test around the equilibrium (zero team gradient, or
  team and member gradients of equal sign nearby)
- multidimensional local-cone test: both gradients make non-negative inner
  products with every feasible direction
- deviation bound ||u_ne - u_opt|| <= (nu1 + 1) / kappa1 * ||F - G||
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import directed_hausdorff

from config import Config
from core.costs import (
    adjusted_members,
    as_profile,
    grad_team,
    jacobian_of_G,
    jacobians_of_F,
    operator_constants,
    pseudo_grad,
    sample_profiles,
)
from core.equilibrium import fixed_point_residual
from core.polyhedra import project
from exceptions.solver_exceptions import (
    BoundViolationError,
    NonMonotoneError,
    PreconditionError,
)
from models.domain_models import (
    ConsistencyVerdict,
    DeviationCertificate,
    EquilibriumResult,
    MemberEvidence,
    Polyhedron,
    PotentialConditionResult,
    ProblemSpec,
    SmoothnessConstants,
    Verdict,
)

logger = logging.getLogger(__name__)

GradFn = Callable[[np.ndarray], np.ndarray]


def check_potential_condition(
    spec: ProblemSpec,
    theta: Optional[np.ndarray] = None,
    sample_budget: Optional[int] = None,
    tol: float = 1e-9,
    seed: Optional[int] = None,
) -> PotentialConditionResult:
    """
    Compare each member's own gradient with the team gradient.

    Samples profiles over the feasible sets and reports the largest member-wise
    gap. For quadratic families both maps are affine, so matching Jacobians and
    matching values at one point is an exact algebraic test.
    """
    budget = Config.alignment.POTENTIAL_SAMPLES if sample_budget is None else sample_budget
    rng = np.random.default_rng(Config.solver.SEED if seed is None else seed)
    N, n = spec.N, spec.n

    profiles = list(sample_profiles(spec, budget, rng)) + [np.zeros((N, n))]
    worst, scale = 0.0, 0.0
    for U in profiles:
        F = pseudo_grad(spec, theta, U).reshape(N, n)
        G = grad_team(spec, U).reshape(N, n)
        worst = max(worst, float(np.max(np.linalg.norm(F - G, axis=1))))
        scale = max(scale, float(np.linalg.norm(G)))
    threshold = tol * (1.0 + scale)

    algebraic = None
    if spec.family.is_quadratic:
        zero = np.zeros((N, n))
        J_F, _ = jacobians_of_F(spec, theta, zero)
        J_G = jacobian_of_G(spec, zero)
        same_slope = bool(np.max(np.abs(J_F - J_G), initial=0.0) <= threshold)
        same_offset = bool(
            np.max(np.abs(pseudo_grad(spec, theta, zero) - grad_team(spec, zero)), initial=0.0) <= threshold
        )
        algebraic = same_slope and same_offset

    holds = worst <= threshold and (algebraic is None or algebraic)
    logger.debug(f"potential condition: holds={holds}, max violation {worst:.3e}")
    return PotentialConditionResult(holds=holds, max_violation=worst, algebraic_match=algebraic)


def _equilibrium_point(
    spec: ProblemSpec, theta: Optional[np.ndarray], ne: Union[EquilibriumResult, np.ndarray]
) -> np.ndarray:
    """The equilibrium profile, after checking it is a fixed point of the game map."""
    if isinstance(ne, EquilibriumResult):
        U, tau = as_profile(spec, ne.point), ne.tau
    else:
        U, tau = as_profile(spec, ne), 1.0
    residual = fixed_point_residual(spec, theta, U, tau)
    if residual > 1e-7 * (1.0 + np.linalg.norm(U)):
        raise PreconditionError(f"profile is not a Nash equilibrium (fixed-point residual {residual:.3e})")
    return U


def _sign_test(
    U: np.ndarray,
    i: int,
    points: np.ndarray,
    team_grad_fn: GradFn,
    member_grad_fn: GradFn,
) -> Tuple[bool, bool, Optional[float]]:
    """Returns (strict_ok, weak_ok, first weak violator) over the grid points."""
    strict_ok, weak_ok, witness = True, True, None
    N = U.shape[0]
    for v in points:
        trial = U.copy()
        trial[i, 0] = v
        product = team_grad_fn(trial).reshape(N)[i] * member_grad_fn(trial).reshape(N)[i]
        if not product > 0:
            strict_ok = False
        if product < 0:
            weak_ok = False
            witness = float(v)
            break
    return strict_ok, weak_ok, witness


def team_cost_is_convex(spec: ProblemSpec, samples: Optional[int] = None, seed: Optional[int] = None) -> bool:
    """
    Team Hessian is positive semidefinite over the feasible profiles.

    Exact for quadratic families; otherwise checked at sampled profiles, so a
    True answer for other families is evidence rather than proof.
    """
    if spec.family.is_quadratic:
        profiles = [np.zeros((spec.N, spec.n))]
    else:
        count = Config.alignment.CONVEXITY_SAMPLES if samples is None else samples
        rng = np.random.default_rng(Config.solver.SEED if seed is None else seed)
        profiles = list(sample_profiles(spec, count, rng))
    for U in profiles:
        H = jacobian_of_G(spec, U)
        smallest = float(np.linalg.eigvalsh(0.5 * (H + H.T))[0])
        if smallest < -1e-9 * (1.0 + float(np.linalg.norm(H, 2))):
            logger.debug(f"team Hessian has eigenvalue {smallest:.3e}; team cost is not convex")
            return False
    return True


def check_consistency_1d(
    spec: ProblemSpec,
    ne: Union[EquilibriumResult, np.ndarray],
    theta: Optional[np.ndarray] = None,
    team_grad_fn: Optional[GradFn] = None,
    member_grad_fns: Optional[GradFn] = None,
    delta: Optional[float] = None,
    grid_k: Optional[int] = None,
) -> ConsistencyVerdict:
    """
    Sign test for scalar strategies.

    Per member: the team gradient vanishes at the equilibrium, or it has the
    member gradient's sign on a grid around the equilibrium inside the relative
    interior of the member's interval. Boundary equilibria also need the team
    gradient to point into the interval. A sign violation is retried with the
    neighbourhood shrunk tenfold before the member is declared inconsistent.
    Passing members only certify consistency when the team cost is convex;
    otherwise the verdict is Inconclusive.

    Raises:
        PreconditionError: If strategies are not scalar or ne is not an equilibrium
    """
    if spec.n != 1:
        raise PreconditionError(f"one-dimensional test needs scalar strategies, got n={spec.n}")
    U = _equilibrium_point(spec, theta, ne)
    team_grad_fn = team_grad_fn or (lambda X: grad_team(spec, X))
    member_grad_fns = member_grad_fns or (lambda X: pseudo_grad(spec, theta, X))
    grid_k = Config.alignment.GRID_K if grid_k is None else grid_k
    attempts = Config.alignment.SHRINK_ATTEMPTS

    G = team_grad_fn(U).reshape(spec.N)
    tol_grad = 1e-7 * (1.0 + float(np.linalg.norm(G)))
    evidence: List[MemberEvidence] = []

    for i in range(spec.N):
        u_i = float(U[i, 0])
        if abs(G[i]) <= tol_grad:
            evidence.append(MemberEvidence(i, "zero-gradient", True, detail=f"|dC/du| = {abs(G[i]):.3e}"))
            continue

        lo, hi = spec.feasible[i].interval()
        at_lower = np.isfinite(lo) and abs(u_i - lo) <= 1e-9 * (1.0 + abs(lo))
        at_upper = np.isfinite(hi) and abs(u_i - hi) <= 1e-9 * (1.0 + abs(hi))
        if (at_lower and G[i] < 0) or (at_upper and G[i] > 0) or not (at_lower or at_upper):
            side = "lower" if at_lower else "upper" if at_upper else "interior"
            evidence.append(MemberEvidence(
                i, "sign", False, form=side, witness=np.array([u_i]),
                detail=f"team gradient {G[i]:.6g} at {side} point {u_i:.6g} admits a team descent",
            ))
            continue

        radius = (Config.alignment.DELTA_SCALE if delta is None else delta) * (1.0 + abs(u_i))
        passed, form, witness = False, "", None
        for _ in range(attempts):
            a, b = max(lo, u_i - radius), min(hi, u_i + radius)
            points = np.linspace(a, b, grid_k + 2)[1:-1]
            points = points[np.abs(points - u_i) > 1e-12 * (1.0 + abs(u_i))]
            strict_ok, weak_ok, witness = _sign_test(U, i, points, team_grad_fn, member_grad_fns)
            if weak_ok:
                passed, form = True, "strict" if strict_ok else "non-strict"
                break
            radius /= 10.0
        evidence.append(MemberEvidence(
            i, "sign", passed, form=form or "non-strict", delta=radius,
            witness=None if passed else np.array([witness]),
        ))

    tolerances = {"tol_grad": tol_grad, "grid_k": float(grid_k)}
    if not all(e.passed for e in evidence):
        return ConsistencyVerdict(Verdict.INCONSISTENT, tuple(evidence), tolerances)
    # sign conditions only locate the team optimum when the team cost is convex
    if not team_cost_is_convex(spec):
        return ConsistencyVerdict(Verdict.INCONCLUSIVE, tuple(evidence), {**tolerances, "convex": 0.0})
    return ConsistencyVerdict(Verdict.CONSISTENT_BY_THEOREM1, tuple(evidence), tolerances)


def _tight_rows(P: Polyhedron, x: np.ndarray) -> np.ndarray:
    return np.flatnonzero(P.slack(x) <= 1e-9 * (1.0 + np.abs(P.b)))


def _cone_polyhedron(P: Polyhedron, x: np.ndarray) -> Polyhedron:
    """Feasible directions at x intersected with the unit box."""
    n = P.dim
    tight = _tight_rows(P, x)
    D = np.vstack([P.D[tight], np.eye(n), -np.eye(n)])
    b = np.concatenate([np.zeros(tight.size), np.ones(2 * n)])
    return Polyhedron(D, b, P.H, np.zeros(P.n_eq))


def _cone_minimum(cone: Polyhedron, g: np.ndarray):
    """min g'd over the direction polyhedron; None when the LP fails."""
    res = linprog(
        g,
        A_ub=cone.D,
        b_ub=cone.b,
        A_eq=cone.H if cone.n_eq else None,
        b_eq=cone.m if cone.n_eq else None,
        bounds=[(None, None)] * cone.dim,
        method="highs",
    )
    if res.status != 0:
        return None
    return float(res.fun), res.x


def check_consistency_multidim(
    spec: ProblemSpec,
    ne: Union[EquilibriumResult, np.ndarray],
    theta: Optional[np.ndarray] = None,
    delta: Optional[float] = None,
    direction_budget: Optional[int] = None,
    seed: Optional[int] = None,
) -> ConsistencyVerdict:
    """
    Local-cone test for vector strategies.

    Per member, the team and member gradients must make non-negative inner
    products with every feasible direction at the equilibrium. The cone is
    polyhedral, so a linear program over its unit-box section decides this
    exactly. Random feasible directions, scaled into the neighbourhood, are
    checked as well; if the program fails but all samples pass the result is
    Inconclusive.
    """
    U = _equilibrium_point(spec, theta, ne)
    budget = Config.alignment.DIRECTION_BUDGET if direction_budget is None else direction_budget
    rng = np.random.default_rng(Config.solver.SEED if seed is None else seed)
    N, n = spec.N, spec.n
    G = grad_team(spec, U).reshape(N, n)
    F = pseudo_grad(spec, theta, U).reshape(N, n)

    evidence: List[MemberEvidence] = []
    exact = True
    for i, P in enumerate(spec.feasible):
        u_i = U[i]
        radius = (Config.alignment.DELTA_SCALE if delta is None else delta) * (1.0 + float(np.linalg.norm(u_i)))
        cone = _cone_polyhedron(P, u_i)
        failure = None
        solved = True

        for label, g in (("team", G[i]), ("member", F[i])):
            tol = 1e-9 * (1.0 + float(np.linalg.norm(g)))
            outcome = _cone_minimum(cone, g)
            if outcome is None:
                solved = False
                continue
            value, d = outcome
            if value < -tol:
                failure = MemberEvidence(
                    i, "cone-generator", False, form="non-strict", delta=radius, witness=u_i + radius * d,
                    detail=f"{label} gradient decreases along a feasible direction (slope {value:.6g})",
                )
                break

        if failure is None:
            failure = _sample_directions(spec, theta, U, i, cone, radius, budget // max(N, 1) or 1, rng)

        if failure is not None:
            evidence.append(failure)
        elif solved:
            evidence.append(MemberEvidence(i, "cone-generator", True, form="non-strict", delta=radius))
        else:
            exact = False
            evidence.append(MemberEvidence(
                i, "sampled", True, form="non-strict", delta=radius, detail="cone program failed; sampled only"
            ))

    if not all(e.passed for e in evidence):
        verdict = Verdict.INCONSISTENT
    elif exact:
        verdict = Verdict.CONSISTENT_BY_COROLLARY2
    else:
        verdict = Verdict.INCONCLUSIVE
    return ConsistencyVerdict(verdict, tuple(evidence), {"direction_budget": float(budget)})


def _sample_directions(spec, theta, U, i, cone, radius, count, rng) -> Optional[MemberEvidence]:
    N, n = U.shape
    for _ in range(count):
        d = project(cone, rng.standard_normal(n)).point
        if np.linalg.norm(d) <= 1e-12:
            continue
        trial = U.copy()
        trial[i] = U[i] + radius * d
        step = trial[i] - U[i]
        for label, g in (
            ("team", grad_team(spec, trial).reshape(N, n)[i]),
            ("member", pseudo_grad(spec, theta, trial).reshape(N, n)[i]),
        ):
            if step @ g < -1e-9 * (1.0 + np.linalg.norm(g)) * np.linalg.norm(step):
                return MemberEvidence(
                    i, "sampled", False, form="non-strict", delta=radius, witness=trial[i].copy(),
                    detail=f"{label} inner product {step @ g:.6g} is negative",
                )
    return None


def _is_identical_preferences(spec: ProblemSpec, theta: Optional[np.ndarray]) -> bool:
    if spec.identical_preferences and (theta is None or not np.any(theta)):
        return True
    try:
        aligned = spec.family.aligned_member_params(spec.team).stacked()
    except PreconditionError:
        return False
    members = adjusted_members(spec, theta)
    return all(np.allclose(p.stacked(), aligned, rtol=0.0, atol=1e-12) for p in members)


def certify_consistency(
    spec: ProblemSpec,
    ne: Union[EquilibriumResult, np.ndarray],
    theta: Optional[np.ndarray] = None,
    **kwargs,
) -> ConsistencyVerdict:
    """Identity, then the potential condition, then the dimension-appropriate local test."""
    if _is_identical_preferences(spec, theta):
        _equilibrium_point(spec, theta, ne)
        return ConsistencyVerdict(Verdict.CONSISTENT_BY_IDENTITY)
    potential = check_potential_condition(spec, theta)
    if potential.holds:
        _equilibrium_point(spec, theta, ne)
        return ConsistencyVerdict(Verdict.CONSISTENT_BY_POTENTIAL, tolerances={"max_violation": potential.max_violation})
    if spec.n == 1:
        return check_consistency_1d(spec, ne, theta, **kwargs)
    return check_consistency_multidim(spec, ne, theta, **kwargs)


def deviation_bound(
    spec: ProblemSpec,
    ne: Union[EquilibriumResult, np.ndarray],
    theta: Optional[np.ndarray] = None,
    constants: Optional[SmoothnessConstants] = None,
    u_star: Optional[np.ndarray] = None,
) -> DeviationCertificate:
    """
    Upper bound on the distance between the equilibrium and the team optimum.

    Raises:
        NonMonotoneError: If kappa1 <= 0
        BoundViolationError: If certified constants give a bound below the actual gap
    """
    point = ne.point if isinstance(ne, EquilibriumResult) else np.asarray(ne, dtype=float).reshape(-1)
    if constants is None:
        kappa1, nu1, certified = operator_constants(spec, None, "G")
    else:
        kappa1, nu1, certified = constants.kappa1, constants.nu1, constants.certified
    if not kappa1 > 0:
        raise NonMonotoneError(f"team gradient is not strongly monotone (kappa1 = {kappa1:.4g})", kappa1)

    gap_norm = float(np.linalg.norm(pseudo_grad(spec, theta, point) - grad_team(spec, point)))
    bound = (nu1 + 1.0) / kappa1 * gap_norm
    actual = None
    if u_star is not None:
        actual = float(np.linalg.norm(point - np.asarray(u_star, dtype=float).reshape(-1)))
        if certified and actual > bound + Config.alignment.BOUND_SLACK:
            raise BoundViolationError(f"deviation {actual:.6g} exceeds the certified bound {bound:.6g}")
    return DeviationCertificate(
        gap_norm=gap_norm,
        kappa1=kappa1,
        nu1=nu1,
        bound=bound,
        closeness_ratio=1.0 / (1.0 + bound),
        actual_gap=actual,
        certified=certified,
    )


def hausdorff(set_a: Sequence, set_b: Sequence) -> float:
    """Hausdorff distance between two finite point sets."""
    A = np.asarray(set_a, dtype=float)
    B = np.asarray(set_b, dtype=float)
    if A.size == 0 or B.size == 0:
        raise PreconditionError("Hausdorff distance needs two nonempty sets")
    A = A.reshape(-1, 1) if A.ndim == 1 else A
    B = B.reshape(-1, 1) if B.ndim == 1 else B
    return float(max(directed_hausdorff(A, B)[0], directed_hausdorff(B, A)[0]))
