"""
Traffic networks as quadratic team problems.

Each member routes one unit of flow from its origin to its destination:
    Xi_i = {u_i : 0 <= u_i <= u_cap, H' u_i = m'_i}
where H' and m'_i drop the last node row of the incidence matrix and the
origin-destination vector (the full rows sum to zero, so one is redundant).
"""

import logging
from typing import Optional

import networkx as nx
import numpy as np

from config import Config
from exceptions.solver_exceptions import NetworkError
from families.quadratic_family import TrafficFamily
from models.domain_models import MemberParams, Polyhedron, ProblemSpec, TeamParams, TrafficNetwork

logger = logging.getLogger(__name__)


def _check_node(net: TrafficNetwork, node: int, what: str) -> None:
    if not 1 <= node <= net.r:
        raise NetworkError(f"{what} references node {node}; nodes are numbered 1..{net.r}")


def to_graph(net: TrafficNetwork) -> nx.DiGraph:
    """Directed graph view of the network with arc indices on the edges."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(1, net.r + 1))
    for k, (tail, head) in enumerate(net.arcs):
        graph.add_edge(tail, head, index=k, free_flow=net.free_flow[k])
    return graph


def validate_network(net: TrafficNetwork) -> nx.DiGraph:
    """
    Check arc endpoints, connectivity and that every member's destination is
    reachable from its origin.

    Raises:
        NetworkError: On the first violation found
    """
    if net.r < 2:
        raise NetworkError("a traffic network needs at least two nodes")
    if not net.arcs:
        raise NetworkError("a traffic network needs at least one arc")
    if len(net.free_flow) != net.n:
        raise NetworkError(f"{len(net.free_flow)} free-flow weights for {net.n} arcs")
    for k, (tail, head) in enumerate(net.arcs):
        _check_node(net, tail, f"arc {k}")
        _check_node(net, head, f"arc {k}")
        if tail == head:
            raise NetworkError(f"arc {k} is a self-loop at node {tail}")
    if any(w <= 0 for w in net.free_flow):
        raise NetworkError("free-flow weights must be positive")

    graph = to_graph(net)
    if not nx.is_weakly_connected(graph):
        raise NetworkError("network is not connected")
    for i, (origin, dest) in enumerate(net.members):
        _check_node(net, origin, f"member {i} origin")
        _check_node(net, dest, f"member {i} destination")
        if origin == dest:
            raise NetworkError(f"member {i} has origin equal to destination ({origin})")
        if not nx.has_path(graph, origin, dest):
            raise NetworkError(f"member {i}: no directed path from node {origin} to node {dest}")
    return graph


def build_incidence(net: TrafficNetwork) -> np.ndarray:
    """Node-arc incidence matrix: -1 at each arc's tail, +1 at its head."""
    H = np.zeros((net.r, net.n))
    for k, (tail, head) in enumerate(net.arcs):
        _check_node(net, tail, f"arc {k}")
        _check_node(net, head, f"arc {k}")
        H[tail - 1, k] = -1.0
        H[head - 1, k] = 1.0
    return H


def build_od_vector(net: TrafficNetwork, origin: int, dest: int) -> np.ndarray:
    """-1 at the origin and +1 at the destination, so H u = m routes one unit of flow."""
    _check_node(net, origin, "origin")
    _check_node(net, dest, "destination")
    if origin == dest:
        raise NetworkError(f"origin and destination are both node {origin}")
    m = np.zeros(net.r)
    m[origin - 1] = -1.0
    m[dest - 1] = 1.0
    return m


def path_flow(net: TrafficNetwork, nodes) -> np.ndarray:
    """Unit arc flow along the node path given as a sequence of node numbers."""
    index = {arc: k for k, arc in enumerate(net.arcs)}
    u = np.zeros(net.n)
    for tail, head in zip(nodes[:-1], nodes[1:]):
        if (tail, head) not in index:
            raise NetworkError(f"no arc from node {tail} to node {head}")
        u[index[(tail, head)]] += 1.0
    return u


def capacity(net: TrafficNetwork) -> float:
    """Per-arc flow cap: CAPACITY_FACTOR times the total demand."""
    return Config.network.CAPACITY_FACTOR * len(net.members)


def build_traffic_problem(
    net: TrafficNetwork,
    team: TeamParams,
    members: MemberParams,
    parameterization: str = "scalar",
    mediator_set: Optional[Polyhedron] = None,
    name: str = "",
) -> ProblemSpec:
    """
    Quadratic traffic problem on net.

    Args:
        net: Network with one origin-destination pair per member
        team: Team congestion (alpha, beta) and free-flow scale gamma
        members: Subjective parameters of each vehicle
        parameterization: "scalar" or "per_arc"
        mediator_set: Defaults to the unconstrained set

    Raises:
        NetworkError: If the network or an OD pair is invalid
    """
    validate_network(net)
    N, n = len(net.members), net.n
    family = TrafficFamily(n, N, net.free_flow, parameterization, network=net)

    H = build_incidence(net)[:-1]
    cap = capacity(net)
    feasible = []
    for origin, dest in net.members:
        m = build_od_vector(net, origin, dest)[:-1]
        D = np.vstack([-np.eye(n), np.eye(n)])
        b = np.concatenate([np.zeros(n), np.full(n, cap)])
        feasible.append(Polyhedron(D, b, H, m))

    theta_set = mediator_set if mediator_set is not None else Polyhedron.free(family.param_dims.total * N)
    logger.debug(f"traffic problem: {net.r} nodes, {n} arcs, {N} members, cap {cap:g}")
    return ProblemSpec(family, team, members, feasible, theta_set, name=name or net.name)
