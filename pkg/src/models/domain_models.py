"""
Immutable value objects shared by the solvers, certificates and services.

All arrays are coerced to float numpy arrays on construction and the
dataclasses are frozen, so instances can be passed between threads freely.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from exceptions.solver_exceptions import DimensionMismatchError, InfeasibleAdjustmentError, PreconditionError

if TYPE_CHECKING:
    from families.base_family import CostFamily


def _vector(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} must be a vector, got shape {arr.shape}")
    return arr


def _matrix(values, cols: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return np.zeros((0, cols))
    arr = np.atleast_2d(arr)
    if arr.shape[1] != cols:
        raise DimensionMismatchError(f"{name} has {arr.shape[1]} columns, expected {cols}")
    return arr


class ParamDims(NamedTuple):
    alpha: int
    beta: int
    gamma: int

    @property
    def total(self) -> int:
        return self.alpha + self.beta + self.gamma


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TeamParams:
    """One (alpha, beta, gamma) parameter triple. Also used per member."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", _vector(self.alpha, "alpha") if np.size(self.alpha) else np.zeros(0))
        object.__setattr__(self, "beta", _vector(self.beta, "beta") if np.size(self.beta) else np.zeros(0))
        object.__setattr__(self, "gamma", _vector(self.gamma, "gamma") if np.size(self.gamma) else np.zeros(0))

    @property
    def dims(self) -> ParamDims:
        return ParamDims(self.alpha.size, self.beta.size, self.gamma.size)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta, self.gamma])

    @classmethod
    def from_stacked(cls, values: np.ndarray, dims: ParamDims) -> "TeamParams":
        values = np.asarray(values, dtype=float)
        if values.size != dims.total:
            raise DimensionMismatchError(f"parameter vector has {values.size} entries, expected {dims.total}")
        a, b = dims.alpha, dims.alpha + dims.beta
        return cls(values[:a], values[a:b], values[b:])

    def shifted(self, delta: np.ndarray) -> "TeamParams":
        return TeamParams.from_stacked(self.stacked() + np.asarray(delta, dtype=float), self.dims)

    def to_dict(self) -> Dict[str, List[float]]:
        return {"alpha": self.alpha.tolist(), "beta": self.beta.tolist(), "gamma": self.gamma.tolist()}


@dataclass(frozen=True, eq=False)
class MemberParams:
    members: Tuple[TeamParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise DimensionMismatchError("at least one member parameter set is required")
        dims = self.members[0].dims
        for i, p in enumerate(self.members):
            if p.dims != dims:
                raise DimensionMismatchError(
                    f"member {i} has parameter dims {tuple(p.dims)}, expected {tuple(dims)}", member=i
                )

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> TeamParams:
        return self.members[i]

    def __iter__(self):
        return iter(self.members)

    @property
    def dims(self) -> ParamDims:
        return self.members[0].dims

    @classmethod
    def uniform(cls, params: TeamParams, count: int) -> "MemberParams":
        return cls(tuple(params for _ in range(count)))

    def stacked(self) -> np.ndarray:
        return np.concatenate([p.stacked() for p in self.members])

    def adjusted(self, theta: np.ndarray) -> "MemberParams":
        """Member parameters after adding the stacked adjustment theta."""
        theta = np.asarray(theta, dtype=float)
        d = self.dims.total
        if theta.size != d * len(self):
            raise DimensionMismatchError(f"theta has {theta.size} entries, expected {d * len(self)}")
        return MemberParams(tuple(p.shifted(theta[i * d:(i + 1) * d]) for i, p in enumerate(self.members)))


@dataclass(frozen=True, eq=False)
class MediatorAdjustment:
    """Stacked adjustment theta, ordered (d_alpha_i, d_beta_i, d_gamma_i) by member."""

    theta: np.ndarray
    dims: ParamDims
    n_members: int

    def __post_init__(self):
        object.__setattr__(self, "theta", _vector(self.theta, "theta") if np.size(self.theta) else np.zeros(0))
        if self.theta.size != self.dims.total * self.n_members:
            raise DimensionMismatchError(
                f"theta has {self.theta.size} entries, expected {self.dims.total * self.n_members}"
            )

    def block(self, i: int) -> TeamParams:
        d = self.dims.total
        return TeamParams.from_stacked(self.theta[i * d:(i + 1) * d], self.dims)

    @classmethod
    def from_blocks(cls, blocks: Sequence[TeamParams]) -> "MediatorAdjustment":
        dims = blocks[0].dims
        return cls(np.concatenate([b.stacked() for b in blocks]), dims, len(blocks))

    @classmethod
    def zeros(cls, dims: ParamDims, n_members: int) -> "MediatorAdjustment":
        return cls(np.zeros(dims.total * n_members), dims, n_members)


# ---------------------------------------------------------------------------
# Feasible sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Polyhedron:
    """
    {u : D u <= b, H u = m}.

    Boxes keep their bounds in `lower` / `upper` (entries may be infinite);
    D and b then hold only the finite bound rows, uppers first.
    """

    D: np.ndarray
    b: np.ndarray
    H: np.ndarray
    m: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        D = np.asarray(self.D, dtype=float)
        n = next((a.shape[1] for a in (H, D) if a.ndim == 2 and a.size), None)
        if n is None and self.lower is not None:
            n = np.size(self.lower)
        if n is None:
            n = next((a.shape[1] for a in (H, D) if a.ndim == 2), None)
        if n is None:
            raise DimensionMismatchError("cannot infer the ambient dimension of the polyhedron")
        object.__setattr__(self, "D", _matrix(D, n, "D"))
        object.__setattr__(self, "H", _matrix(H, n, "H"))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(-1))
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float).reshape(-1))
        if self.b.size != self.D.shape[0]:
            raise DimensionMismatchError(f"b has {self.b.size} entries for {self.D.shape[0]} inequality rows")
        if self.m.size != self.H.shape[0]:
            raise DimensionMismatchError(f"m has {self.m.size} entries for {self.H.shape[0]} equality rows")
        if self.lower is not None:
            object.__setattr__(self, "lower", _vector(self.lower, "lower"))
            object.__setattr__(self, "upper", _vector(self.upper, "upper"))
            if self.lower.size != n or self.upper.size != n:
                raise DimensionMismatchError("box bounds must match the ambient dimension")

    @property
    def dim(self) -> int:
        return self.H.shape[1]

    @property
    def n_ineq(self) -> int:
        return self.D.shape[0]

    @property
    def n_eq(self) -> int:
        return self.H.shape[0]

    @property
    def is_box(self) -> bool:
        return self.lower is not None and self.n_eq == 0

    @classmethod
    def box(cls, lower, upper) -> "Polyhedron":
        lower = _vector(lower, "lower")
        upper = _vector(np.broadcast_to(np.asarray(upper, dtype=float), lower.shape), "upper")
        n = lower.size
        eye = np.eye(n)
        hi = np.isfinite(upper)
        lo = np.isfinite(lower)
        D = np.vstack([eye[hi], -eye[lo]])
        b = np.concatenate([upper[hi], -lower[lo]])
        return cls(D.reshape(-1, n), b, np.zeros((0, n)), np.zeros(0), lower, upper)

    @classmethod
    def free(cls, n: int) -> "Polyhedron":
        return cls.box(np.full(n, -np.inf), np.full(n, np.inf))

    @classmethod
    def affine(cls, H, m) -> "Polyhedron":
        H = np.atleast_2d(np.asarray(H, dtype=float))
        return cls(np.zeros((0, H.shape[1])), np.zeros(0), H, m)

    def box_row_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Maps each D row of a box to (coordinate, is_upper)."""
        upper_idx = np.flatnonzero(np.isfinite(self.upper))
        lower_idx = np.flatnonzero(np.isfinite(self.lower))
        coords = np.concatenate([upper_idx, lower_idx])
        is_upper = np.concatenate([np.ones(upper_idx.size, bool), np.zeros(lower_idx.size, bool)])
        return coords, is_upper

    def slack(self, x: np.ndarray) -> np.ndarray:
        return self.b - self.D @ x

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        ok_ineq = np.all(self.slack(x) >= -tol * (1.0 + np.abs(self.b)))
        ok_eq = np.all(np.abs(self.H @ x - self.m) <= tol * (1.0 + np.abs(self.m)))
        return bool(ok_ineq and ok_eq)

    def interval(self) -> Tuple[float, float]:
        """Bounds of a one-dimensional polyhedron."""
        if self.dim != 1:
            raise DimensionMismatchError(f"interval() needs a 1-D polyhedron, got dimension {self.dim}")
        lo, hi = -np.inf, np.inf
        for d, rhs in zip(self.D[:, 0], self.b):
            if d > 0:
                hi = min(hi, rhs / d)
            elif d < 0:
                lo = max(lo, rhs / d)
        for h, rhs in zip(self.H[:, 0], self.m):
            if h != 0:
                lo = hi = rhs / h
        return lo, hi

    def with_pinned(self, coords: Sequence[int]) -> "Polyhedron":
        """Pins the given coordinates to zero; rows touching only them are dropped."""
        coords = sorted(set(int(c) for c in coords))
        if not coords:
            return self
        n = self.dim
        touched = np.zeros(n, bool)
        touched[coords] = True
        keep = ~np.all(self.D[:, ~touched] == 0, axis=1)
        dropped = np.flatnonzero(~keep)
        violated = dropped[self.b[dropped] < 0]
        if violated.size:
            raise InfeasibleAdjustmentError(
                f"pinning coordinates {coords} to zero violates inequality row {int(violated[0])}",
                constraint=int(violated[0]),
            )
        D, b = self.D[keep], self.b[keep]
        D = D.copy()
        D[:, touched] = 0.0
        pins = np.eye(n)[coords]
        H = np.vstack([self.H, pins])
        m = np.concatenate([self.m, np.zeros(len(coords))])
        return Polyhedron(D, b, H, m)


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    point: np.ndarray
    active_set: Tuple[int, ...]
    multipliers: np.ndarray            # lambda >= 0, one per inequality row
    eq_multipliers: np.ndarray         # mu, one per equality row
    is_smooth_point: bool
    tight_set: Tuple[int, ...] = ()
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class ValidationCertificate:
    slater_point: np.ndarray
    slater_margin: float
    lower_support: np.ndarray
    upper_support: np.ndarray
    compact: bool


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProblemSpec:
    family: "CostFamily"
    team: TeamParams
    members: MemberParams
    feasible: Tuple[Polyhedron, ...]
    mediator_set: Polyhedron
    identical_preferences: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "feasible", tuple(self.feasible))
        N = self.family.n_members
        if N < 1:
            raise DimensionMismatchError("a problem needs at least one member")
        if len(self.members) != N:
            raise DimensionMismatchError(f"{len(self.members)} member parameter sets for {N} members")
        if len(self.feasible) != N:
            raise DimensionMismatchError(f"{len(self.feasible)} feasible sets for {N} members")
        for i, poly in enumerate(self.feasible):
            if poly.dim != self.family.dim:
                raise DimensionMismatchError(
                    f"feasible set of member {i} has dimension {poly.dim}, expected {self.family.dim}", member=i
                )
        if self.mediator_set.dim != self.theta_dim:
            raise DimensionMismatchError(
                f"mediator set has dimension {self.mediator_set.dim}, expected {self.theta_dim}"
            )
        self.family.validate_params(self.team, self.members)

    @property
    def N(self) -> int:
        return self.family.n_members

    @property
    def n(self) -> int:
        return self.family.dim

    @property
    def dims(self) -> ParamDims:
        return self.family.param_dims

    @property
    def theta_dim(self) -> int:
        return self.family.param_dims.total * self.family.n_members

    def zero_theta(self) -> np.ndarray:
        return np.zeros(self.theta_dim)

    def with_member_params(self, members: MemberParams) -> "ProblemSpec":
        return ProblemSpec(self.family, self.team, members, self.feasible, self.mediator_set, False, self.name)

    def with_mediator_set(self, mediator_set: Polyhedron) -> "ProblemSpec":
        return ProblemSpec(self.family, self.team, self.members, self.feasible, mediator_set,
                           self.identical_preferences, self.name)

    def with_identical_preferences(self) -> "ProblemSpec":
        """The game whose members share the team's preferences."""
        aligned = self.family.aligned_member_params(self.team)
        return ProblemSpec(self.family, self.team, MemberParams.uniform(aligned, self.N), self.feasible,
                           self.mediator_set, True, self.name)


@dataclass(frozen=True)
class SmoothnessConstants:
    kappa1: float
    nu1: float
    kappa2: float
    nu2: float
    nu_theta: float
    nu_u: float
    certified: bool = True

    def __post_init__(self):
        if self.certified:
            for name in ("kappa1", "nu1", "kappa2", "nu2"):
                if not getattr(self, name) > 0:
                    raise PreconditionError(f"certified constant {name} must be positive")
            if self.kappa1 > self.nu1 * (1 + 1e-9) or self.kappa2 > self.nu2 * (1 + 1e-9):
                raise PreconditionError("strong monotonicity modulus exceeds the Lipschitz constant")
            if self.nu_theta < 0 or self.nu_u < 0:
                raise PreconditionError("Jacobian Lipschitz constants must be non-negative")


@dataclass(frozen=True, eq=False)
class LqrSpec:
    """
    Finite-horizon LQR with N input channels.

    x_{t+1} = A x_t + sum_i B_i u_{i,t}. Stage weights Q(alpha~) apply to x_0..x_{T-1},
    Q_f(alpha~) to x_T and R_i(beta~) to u_{i,t}; each weight is a basis expansion.
    """

    A: np.ndarray
    B: Tuple[np.ndarray, ...]
    Q_basis: np.ndarray           # (d_alpha~, p, p)
    Qf_basis: np.ndarray          # (d_alpha~, p, p)
    R_basis: np.ndarray           # (N, d_beta~, m, m)
    horizon: int
    x0: np.ndarray
    team_alpha: np.ndarray
    team_beta: np.ndarray
    member_alpha: Tuple[np.ndarray, ...] = ()
    member_beta: Tuple[np.ndarray, ...] = ()
    control_bound: Optional[float] = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", tuple(np.atleast_2d(np.asarray(b, dtype=float)) for b in self.B))
        object.__setattr__(self, "Q_basis", np.asarray(self.Q_basis, dtype=float))
        object.__setattr__(self, "Qf_basis", np.asarray(self.Qf_basis, dtype=float))
        object.__setattr__(self, "R_basis", np.asarray(self.R_basis, dtype=float))
        object.__setattr__(self, "x0", _vector(self.x0, "x0"))
        object.__setattr__(self, "team_alpha", _vector(self.team_alpha, "team_alpha"))
        object.__setattr__(self, "team_beta", _vector(self.team_beta, "team_beta"))
        N = len(self.B)
        if not self.member_alpha:
            object.__setattr__(self, "member_alpha", tuple(self.team_alpha for _ in range(N)))
        if not self.member_beta:
            object.__setattr__(self, "member_beta", tuple(self.team_beta for _ in range(N)))
        object.__setattr__(self, "member_alpha", tuple(_vector(a, "member_alpha") for a in self.member_alpha))
        object.__setattr__(self, "member_beta", tuple(_vector(b, "member_beta") for b in self.member_beta))

        p = A.shape[0]
        if A.shape != (p, p):
            raise DimensionMismatchError(f"A must be square, got {A.shape}")
        if self.horizon < 1:
            raise DimensionMismatchError("horizon must be at least 1")
        if N < 1:
            raise DimensionMismatchError("at least one input matrix is required")
        m = self.B[0].shape[1]
        for i, Bi in enumerate(self.B):
            if Bi.shape != (p, m):
                raise DimensionMismatchError(
                    f"B[{i}] has shape {Bi.shape}, expected {(p, m)} (members share the input dimension)", member=i
                )
        if self.x0.size != p:
            raise DimensionMismatchError(f"x0 has {self.x0.size} entries, expected {p}")
        da = self.team_alpha.size
        if self.Q_basis.shape != (da, p, p) or self.Qf_basis.shape != (da, p, p):
            raise DimensionMismatchError("Q and Q_f bases must have shape (d_alpha, p, p)")
        db = self.team_beta.size
        if self.R_basis.shape != (N, db, m, m):
            raise DimensionMismatchError(f"R basis must have shape {(N, db, m, m)}, got {self.R_basis.shape}")
        if len(self.member_alpha) != N or len(self.member_beta) != N:
            raise DimensionMismatchError("one raw parameter pair per member is required")
        for basis, name in ((self.Q_basis, "Q"), (self.Qf_basis, "Q_f"), (self.R_basis, "R")):
            if not np.allclose(basis, np.swapaxes(basis, -1, -2)):
                raise DimensionMismatchError(f"{name} basis matrices must be symmetric")

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def input_dim(self) -> int:
        return self.B[0].shape[1]

    @property
    def n_members(self) -> int:
        return len(self.B)


# ---------------------------------------------------------------------------
# Solver results
# ---------------------------------------------------------------------------

class SolutionKind(str, Enum):
    NE = "NE"
    TEAM_OPT = "TeamOpt"


@dataclass(frozen=True)
class SolverConfig:
    tau: Optional[float] = None
    tol: float = 1e-10
    max_iter: int = 100000
    record_trace: bool = False
    stagnation_window: int = 200

    def __post_init__(self):
        if self.tau is not None and not self.tau > 0:
            raise PreconditionError(f"tau must be positive, got {self.tau}")
        if not self.tol > 0:
            raise PreconditionError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise PreconditionError("max_iter must be at least 1")

    @classmethod
    def from_defaults(cls, **overrides) -> "SolverConfig":
        from config import Config

        values = dict(
            tol=Config.solver.TOL,
            max_iter=Config.solver.MAX_ITER,
            stagnation_window=Config.solver.STAGNATION_WINDOW,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    point: np.ndarray
    residual: float
    iterations: int
    kind: SolutionKind
    tau: float
    trace: Tuple[float, ...] = ()
    iterates: Tuple[np.ndarray, ...] = ()
    rate_bound: Optional[float] = None


@dataclass(frozen=True, eq=False)
class SensitivityMatrix:
    J: np.ndarray
    converged: bool
    used_conservative_fallback: bool
    residual: float
    iterations: int = 0


class Verdict(str, Enum):
    CONSISTENT_BY_IDENTITY = "ConsistentByIdentity"
    CONSISTENT_BY_POTENTIAL = "ConsistentByPotential"
    CONSISTENT_BY_THEOREM1 = "ConsistentByTheorem1"
    CONSISTENT_BY_COROLLARY2 = "ConsistentByCorollary2"
    INCONSISTENT = "Inconsistent"
    INCONCLUSIVE = "Inconclusive"

    @property
    def is_consistent(self) -> bool:
        return self.value.startswith("Consistent")


@dataclass(frozen=True, eq=False)
class MemberEvidence:
    member: int
    branch: str
    passed: bool
    form: str = ""
    delta: Optional[float] = None
    witness: Optional[np.ndarray] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "member": self.member,
            "branch": self.branch,
            "passed": self.passed,
            "form": self.form,
            "delta": self.delta,
            "witness": None if self.witness is None else np.atleast_1d(self.witness).tolist(),
            "detail": self.detail,
        }


@dataclass(frozen=True, eq=False)
class ConsistencyVerdict:
    verdict: Verdict
    evidence: Tuple[MemberEvidence, ...] = ()
    tolerances: Dict[str, float] = field(default_factory=dict)

    @property
    def cr(self) -> int:
        return 1 if self.verdict.is_consistent else 0


@dataclass(frozen=True)
class PotentialConditionResult:
    holds: bool
    max_violation: float
    algebraic_match: Optional[bool] = None

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class DeviationCertificate:
    gap_norm: float
    kappa1: float
    nu1: float
    bound: float
    closeness_ratio: float
    actual_gap: Optional[float] = None
    certified: bool = True


# ---------------------------------------------------------------------------
# Mediation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiminishingSchedule:
    """eta[k] = c / (k + 1): sum eta = inf, sum eta^2 < inf."""

    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise PreconditionError("diminishing schedule constant must be positive")

    def step(self, k: int) -> float:
        return self.c / (k + 1)

    def describe(self) -> str:
        return f"dimin:{self.c!r}"


@dataclass(frozen=True)
class FixedSchedule:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise PreconditionError("fixed stepsize must be positive")

    def step(self, k: int) -> float:
        return self.eta

    def describe(self) -> str:
        return f"fixed:{self.eta!r}"


def parse_schedule(text: str):
    kind, _, value = text.partition(":")
    try:
        if kind == "dimin":
            return DiminishingSchedule(float(value) if value else 1.0)
        if kind == "fixed":
            return FixedSchedule(float(value))
    except ValueError as e:
        raise PreconditionError(f"invalid schedule value in {text!r}") from e
    raise PreconditionError(f"unknown schedule {text!r}; expected dimin:c or fixed:eta")


@dataclass(frozen=True, eq=False)
class MediationConfig:
    schedule: object = field(default_factory=DiminishingSchedule)
    solver: SolverConfig = field(default_factory=SolverConfig)
    tol: float = 1e-8
    max_outer_iter: int = 500
    theta0: Optional[np.ndarray] = None
    nu_psi: Optional[float] = None
    divergence_factor: float = 10.0

    def __post_init__(self):
        if isinstance(self.schedule, FixedSchedule) and self.nu_psi is not None:
            if not self.schedule.eta < 2.0 / self.nu_psi:
                raise PreconditionError(
                    f"fixed stepsize {self.schedule.eta} must be below 2/nu_psi = {2.0 / self.nu_psi}"
                )
        if self.max_outer_iter < 0:
            raise PreconditionError("max_outer_iter must be non-negative")


@dataclass(frozen=True, eq=False)
class HypergradientResult:
    omega: np.ndarray
    psi: float
    equilibrium: EquilibriumResult
    used_conservative_fallback: bool


@dataclass(frozen=True, eq=False)
class MediationReport:
    theta_final: np.ndarray
    psi_trace: Tuple[float, ...]
    grad_norms: Tuple[float, ...]
    criticality_residual: float
    used_conservative_fallback: int
    inner_iterations: Tuple[int, ...]
    outer_iterations: int
    converged: bool
    schedule: str = ""
    final_gap: float = float("nan")


# ---------------------------------------------------------------------------
# Networks and sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrafficNetwork:
    """Nodes are numbered 1..r. Arcs and OD pairs use node numbers."""

    r: int
    arcs: Tuple[Tuple[int, int], ...]
    members: Tuple[Tuple[int, int], ...]
    free_flow: Tuple[float, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple((int(a), int(b)) for a, b in self.arcs))
        object.__setattr__(self, "members", tuple((int(a), int(b)) for a, b in self.members))
        if not self.free_flow:
            object.__setattr__(self, "free_flow", tuple(1.0 for _ in self.arcs))
        object.__setattr__(self, "free_flow", tuple(float(w) for w in self.free_flow))

    @property
    def n(self) -> int:
        return len(self.arcs)


@dataclass(frozen=True)
class ExperimentGrid:
    alpha_values: Tuple[float, ...]
    beta_values: Tuple[float, ...]
    gamma_values: Tuple[float, ...]
    vary_in_unison: bool = True

    def __post_init__(self):
        for name in ("alpha_values", "beta_values", "gamma_values"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise PreconditionError(f"{name} must not be empty")
            object.__setattr__(self, name, values)

    def cells(self) -> List[Tuple[float, float, float]]:
        return [(a, b, g) for a in self.alpha_values for b in self.beta_values for g in self.gamma_values]


@dataclass(frozen=True)
class SweepRow:
    alpha_i: float
    beta_i: float
    gamma_i: float
    cr: int = 0
    closeness_ratio: float = float("nan")
    travel_time_diff: float = float("nan")
    gap: float = float("nan")
    status: str = "ok"
    verdict: str = ""
    team_cost_ne: float = float("nan")
    team_cost_opt: float = float("nan")
