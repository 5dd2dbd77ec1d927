from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Optional, Any, Dict, Literal, Union
from enum import Enum

from config import Config

FORMAT_VERSION = 1

# Problem file schema

class ParamsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: List[float] = []
    beta: List[float] = []
    gamma: List[float] = []

class PolyhedronModel(BaseModel):
    """Either a box (lower/upper, null for infinite) or rows D u <= b, H u = m."""
    model_config = ConfigDict(extra="forbid")

    lower: Optional[List[Optional[float]]] = None
    upper: Optional[List[Optional[float]]] = None
    D: Optional[List[List[float]]] = None
    b: Optional[List[float]] = None
    H: Optional[List[List[float]]] = None
    m: Optional[List[float]] = None

    @model_validator(mode='after')
    def check_form(self):
        is_box = self.lower is not None or self.upper is not None
        has_rows = any(v is not None for v in (self.D, self.b, self.H, self.m))
        if is_box and has_rows:
            raise ValueError("give either lower/upper or D/b/H/m, not both")
        if is_box and (self.lower is None or self.upper is None):
            raise ValueError("a box needs both lower and upper")
        if is_box and len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have the same length")
        if (self.D is None) != (self.b is None):
            raise ValueError("D and b must be given together")
        if (self.H is None) != (self.m is None):
            raise ValueError("H and m must be given together")
        if not is_box and not has_rows:
            raise ValueError("empty polyhedron description")
        return self

class ArcModel(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    tail: int = Field(alias="from")
    head: int = Field(alias="to")
    free_flow: float = 1.0

class NetworkModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nodes: int
    arcs: List[ArcModel]
    name: str = ""

class OdPairModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    origin: int
    dest: int

class QuadraticFamilyModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["quadratic"]
    Q_basis: List[Any]
    B_basis: List[Any]
    c_basis: List[Any]
    offset_basis: Optional[List[float]] = None

class TrafficFamilyModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["traffic"]
    parameterization: Literal["scalar", "per_arc"] = "scalar"

class SinrFamilyModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["sinr"]
    gains: List[float]
    noise: float

class ProblemDocument(BaseModel):
    """Versioned problem file. Traffic problems carry a network instead of feasible sets."""
    model_config = ConfigDict(extra="forbid")

    format_version: Literal[1] = FORMAT_VERSION
    name: str = ""
    family: Union[QuadraticFamilyModel, TrafficFamilyModel, SinrFamilyModel] = Field(discriminator="type")
    network: Optional[NetworkModel] = None
    members: List[OdPairModel] = []
    team_params: ParamsModel
    member_params: List[ParamsModel]
    identical_preferences: bool = False
    feasible_sets: List[PolyhedronModel] = []
    mediator_set: Optional[PolyhedronModel] = None

    @model_validator(mode='after')
    def check_family_sections(self):
        if self.family.type == "traffic":
            if self.network is None:
                raise ValueError("traffic problems need a network section")
            if not self.members:
                raise ValueError("traffic problems need at least one origin-destination pair")
            if self.feasible_sets:
                raise ValueError("traffic feasible sets are derived from the network; drop feasible_sets")
        else:
            if self.network is not None or self.members:
                raise ValueError(f"network and members sections only apply to traffic problems, not {self.family.type}")
            if not self.feasible_sets:
                raise ValueError("feasible_sets must list one polyhedron per member")
        return self

class GridDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format_version: Literal[1] = FORMAT_VERSION
    alpha_values: List[float]
    beta_values: List[float]
    gamma_values: List[float]
    vary_in_unison: bool = True

# API models

class Scenario(str, Enum):
    ALPHA = "alpha"
    GAMMA = "gamma"
    ALPHA_BETA = "alpha-beta"
    ALL = "all"

class SolveRequest(BaseModel):
    problem: ProblemDocument
    theta: Optional[List[float]] = None
    tau: Optional[float] = None
    tol: Optional[float] = None
    max_iter: Optional[int] = None

class SolveResponse(BaseModel):
    kind: str
    point: List[float]
    residual: float
    iterations: int
    tau: float
    rate_bound: Optional[float] = None

class CheckRequest(BaseModel):
    problem: ProblemDocument
    theta: Optional[List[float]] = None

class CheckResponse(BaseModel):
    verdict: str
    cr: int
    closeness_ratio: float
    evidence: List[Dict[str, Any]]
    deviation: Optional[Dict[str, Any]] = None
    gap: float

class MediateRequest(BaseModel):
    problem: ProblemDocument
    schedule: str = f"dimin:{Config.mediation.DIMINISHING_C!r}"
    scenario: Scenario = Scenario.ALL
    tol: Optional[float] = None
    max_outer_iter: Optional[int] = None

class MediateResponse(BaseModel):
    theta_final: List[float]
    psi_trace: List[float]
    grad_norms: List[float]
    inner_iterations: List[int]
    criticality_residual: float
    used_conservative_fallback: int
    outer_iterations: int
    converged: bool
    schedule: str
    final_gap: float
