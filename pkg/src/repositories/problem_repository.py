import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import ValidationError

from config import Config
from core.network import build_traffic_problem
from exceptions.solver_exceptions import DimensionMismatchError, SchemaError
from families.family_factory import FamilyFactory
from families.quadratic_family import QuadraticFamily, TrafficFamily
from families.sinr_family import SinrFamily
from models.api_models import (
    ArcModel,
    GridDocument,
    NetworkModel,
    OdPairModel,
    ParamsModel,
    PolyhedronModel,
    ProblemDocument,
    QuadraticFamilyModel,
    SinrFamilyModel,
    TrafficFamilyModel,
)
from models.domain_models import (
    ExperimentGrid,
    MemberParams,
    Polyhedron,
    ProblemSpec,
    TeamParams,
    TrafficNetwork,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

BUNDLED_PROBLEM = Path(__file__).resolve().parent.parent / "data" / "bundled_network.json"


def _field_path(loc) -> str:
    return ".".join(str(part) for part in loc)


def _params(model: ParamsModel) -> TeamParams:
    return TeamParams(model.alpha, model.beta, model.gamma)


def _params_model(params: TeamParams) -> ParamsModel:
    return ParamsModel(**params.to_dict())


def _bound(values, fill: float) -> np.ndarray:
    return np.array([fill if v is None else v for v in values], dtype=float)


def _polyhedron(model: PolyhedronModel, dim: int, field: str) -> Polyhedron:
    try:
        if model.lower is not None:
            if len(model.lower) != dim:
                raise SchemaError(f"box has {len(model.lower)} coordinates, expected {dim}", field=field)
            return Polyhedron.box(_bound(model.lower, -np.inf), _bound(model.upper, np.inf))
        D = np.asarray(model.D if model.D is not None else np.zeros((0, dim)), dtype=float).reshape(-1, dim)
        H = np.asarray(model.H if model.H is not None else np.zeros((0, dim)), dtype=float).reshape(-1, dim)
        b = model.b if model.b is not None else []
        m = model.m if model.m is not None else []
        return Polyhedron(D, b, H, m)
    except DimensionMismatchError as e:
        raise SchemaError(str(e), field=field) from e


def _power_box(P: Polyhedron, field: str) -> Polyhedron:
    """Transmit powers stay in [u_min, u_max]; missing bounds take the configured limits."""
    if not P.is_box:
        raise SchemaError("sinr strategy sets must be boxes of transmit powers", field=field)
    u_min, u_max = Config.network.SINR_U_MIN, Config.network.SINR_U_MAX
    lower = np.where(np.isinf(P.lower), u_min, P.lower)
    upper = np.where(np.isinf(P.upper), u_max, P.upper)
    if np.any(lower < u_min):
        raise SchemaError(f"transmit power lower bound {lower.min():g} is below {u_min:g}", field=field)
    return Polyhedron.box(lower, upper)


def _polyhedron_model(P: Polyhedron) -> PolyhedronModel:
    if P.is_box:
        return PolyhedronModel(
            lower=[None if np.isinf(v) else float(v) for v in P.lower],
            upper=[None if np.isinf(v) else float(v) for v in P.upper],
        )
    return PolyhedronModel(
        D=P.D.tolist() if P.n_ineq else None,
        b=P.b.tolist() if P.n_ineq else None,
        H=P.H.tolist() if P.n_eq else None,
        m=P.m.tolist() if P.n_eq else None,
    )


class ProblemRepository:
    """Reads and writes versioned JSON problem files."""

    def load_document(self, path: PathLike) -> ProblemDocument:
        text = self._read(path)
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", field=str(path)) from e
        return self.parse_document(raw)

    def parse_document(self, raw) -> ProblemDocument:
        try:
            return ProblemDocument.model_validate(raw)
        except ValidationError as e:
            first = e.errors()[0]
            raise SchemaError(first["msg"], field=_field_path(first["loc"])) from e

    def load_problem(self, path: PathLike) -> ProblemSpec:
        spec = self.build_spec(self.load_document(path))
        logger.info(f"loaded problem {spec.name or path}: {spec.family.tag}, N={spec.N}, n={spec.n}")
        return spec

    def save_document(self, document: ProblemDocument, path: PathLike) -> None:
        Path(path).write_text(
            json.dumps(document.model_dump(by_alias=True, exclude_none=True), indent=2) + "\n",
            encoding="utf-8",
        )

    def save_problem(self, spec: ProblemSpec, path: PathLike) -> None:
        self.save_document(self.document_from_spec(spec), path)

    def build_spec(self, doc: ProblemDocument) -> ProblemSpec:
        """
        Assemble the ProblemSpec a document describes.

        Raises:
            SchemaError: For references the schema alone cannot catch
        """
        team = _params(doc.team_params)
        try:
            members = MemberParams(tuple(_params(p) for p in doc.member_params))
        except DimensionMismatchError as e:
            raise SchemaError(str(e), field="member_params") from e
        family_doc = doc.family

        if family_doc.type == "traffic":
            net = self._network(doc)
            if len(members) != len(net.members):
                raise SchemaError(
                    f"{len(members)} member parameter sets for {len(net.members)} origin-destination pairs",
                    field="member_params",
                )
            theta_dim = team.dims.total * len(net.members)
            mediator = self._mediator(doc, theta_dim)
            spec = build_traffic_problem(net, team, members, family_doc.parameterization, mediator, doc.name)
        else:
            if family_doc.type == "quadratic":
                family = FamilyFactory.get_family(
                    "quadratic",
                    Q_basis=np.asarray(family_doc.Q_basis, dtype=float),
                    B_basis=np.asarray(family_doc.B_basis, dtype=float),
                    c_basis=np.asarray(family_doc.c_basis, dtype=float),
                    offset_basis=family_doc.offset_basis,
                )
            else:
                family = FamilyFactory.get_family("sinr", gains=family_doc.gains, noise=family_doc.noise)
            if len(doc.feasible_sets) != family.n_members:
                raise SchemaError(
                    f"{len(doc.feasible_sets)} feasible sets for {family.n_members} members", field="feasible_sets"
                )
            feasible = [
                _polyhedron(P, family.dim, f"feasible_sets.{i}") for i, P in enumerate(doc.feasible_sets)
            ]
            if family_doc.type == "sinr":
                feasible = [_power_box(P, f"feasible_sets.{i}") for i, P in enumerate(feasible)]
            mediator = self._mediator(doc, family.param_dims.total * family.n_members)
            spec = ProblemSpec(family, team, members, feasible, mediator, name=doc.name)

        if doc.identical_preferences:
            spec = spec.with_identical_preferences()
        return spec

    def document_from_spec(self, spec: ProblemSpec) -> ProblemDocument:
        """Inverse of build_spec. LQR reductions are written as plain quadratic problems."""
        family = spec.family
        if isinstance(family, TrafficFamily):
            return self._traffic_document(spec)
        if isinstance(family, SinrFamily):
            family_doc = SinrFamilyModel(type="sinr", gains=family.gains.tolist(), noise=family.noise)
        elif isinstance(family, QuadraticFamily):
            family_doc = QuadraticFamilyModel(
                type="quadratic",
                Q_basis=family.Q_basis.tolist(),
                B_basis=family.B_basis.tolist(),
                c_basis=family.c_basis.tolist(),
                offset_basis=family.offset_basis.tolist(),
            )
        else:
            raise SchemaError(f"no file format for {family.tag} problems", field="family")
        return ProblemDocument(
            name=spec.name,
            family=family_doc,
            team_params=_params_model(spec.team),
            member_params=[_params_model(p) for p in spec.members],
            identical_preferences=spec.identical_preferences,
            feasible_sets=[_polyhedron_model(P) for P in spec.feasible],
            mediator_set=_polyhedron_model(spec.mediator_set),
        )

    def _traffic_document(self, spec: ProblemSpec) -> ProblemDocument:
        net = spec.family.network
        if net is None:
            raise SchemaError("traffic family has no source network", field="network")
        return ProblemDocument(
            name=spec.name,
            family=TrafficFamilyModel(type="traffic", parameterization=spec.family.parameterization),
            network=NetworkModel(
                nodes=net.r,
                name=net.name,
                arcs=[ArcModel(tail=a, head=b, free_flow=w) for (a, b), w in zip(net.arcs, net.free_flow)],
            ),
            members=[OdPairModel(origin=o, dest=d) for o, d in net.members],
            team_params=_params_model(spec.team),
            member_params=[_params_model(p) for p in spec.members],
            identical_preferences=spec.identical_preferences,
            mediator_set=_polyhedron_model(spec.mediator_set),
        )

    def load_theta(self, path: PathLike, theta_dim: int) -> np.ndarray:
        """A JSON list of floats, or an object with a theta list."""
        text = self._read(path)
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", field=str(path)) from e
        values = raw.get("theta") if isinstance(raw, dict) else raw
        try:
            theta = np.asarray(values, dtype=float).reshape(-1)
        except (TypeError, ValueError) as e:
            raise SchemaError("theta must be a list of numbers", field="theta") from e
        if theta.size != theta_dim:
            raise SchemaError(f"theta has {theta.size} entries, expected {theta_dim}", field="theta")
        return theta

    def load_grid(self, path: PathLike) -> ExperimentGrid:
        text = self._read(path)
        try:
            doc = GridDocument.model_validate_json(text)
        except ValidationError as e:
            first = e.errors()[0]
            raise SchemaError(first["msg"], field=_field_path(first["loc"])) from e
        return ExperimentGrid(doc.alpha_values, doc.beta_values, doc.gamma_values, doc.vary_in_unison)

    def _network(self, doc: ProblemDocument) -> TrafficNetwork:
        net_doc = doc.network
        for k, arc in enumerate(net_doc.arcs):
            for end, node in (("from", arc.tail), ("to", arc.head)):
                if not 1 <= node <= net_doc.nodes:
                    raise SchemaError(
                        f"arc {k} references node {node}; nodes are numbered 1..{net_doc.nodes}",
                        field=f"network.arcs.{k}.{end}",
                    )
        for i, od in enumerate(doc.members):
            for end, node in (("origin", od.origin), ("dest", od.dest)):
                if not 1 <= node <= net_doc.nodes:
                    raise SchemaError(f"member {i} references node {node}", field=f"members.{i}.{end}")
        return TrafficNetwork(
            r=net_doc.nodes,
            arcs=tuple((a.tail, a.head) for a in net_doc.arcs),
            members=tuple((od.origin, od.dest) for od in doc.members),
            free_flow=tuple(a.free_flow for a in net_doc.arcs),
            name=net_doc.name or doc.name,
        )

    def _mediator(self, doc: ProblemDocument, theta_dim: int) -> Optional[Polyhedron]:
        if doc.mediator_set is None:
            return Polyhedron.free(theta_dim)
        return _polyhedron(doc.mediator_set, theta_dim, "mediator_set")

    def _read(self, path: PathLike) -> str:
        try:
            return Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise SchemaError(f"cannot read file: {e.strerror}", field=str(path)) from e
