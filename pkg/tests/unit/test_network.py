"""Unit tests for traffic networks and their quadratic problems"""
import numpy as np
import pytest

from core.equilibrium import solve_ne, solve_team_optimum
from core.network import (
    build_incidence,
    build_od_vector,
    build_traffic_problem,
    capacity,
    path_flow,
    to_graph,
    validate_network,
)
from exceptions.solver_exceptions import NetworkError
from models.domain_models import MemberParams, TeamParams, TrafficNetwork


@pytest.fixture
def diamond():
    """1 -> {2, 3} -> 4 with one member from 1 to 4."""
    return TrafficNetwork(4, ((1, 2), (1, 3), (2, 4), (3, 4)), ((1, 4),), free_flow=(1.0, 2.0, 1.0, 2.0))


class TestIncidence:
    """Incidence matrix and origin-destination vectors"""

    def test_incidence_columns(self, diamond):
        """-1 at the tail, +1 at the head, zero column sums"""
        H = build_incidence(diamond)
        assert H.shape == (4, 4)
        assert np.allclose(H[:, 0], [-1.0, 1.0, 0.0, 0.0])
        assert np.allclose(H[:, 3], [0.0, 0.0, -1.0, 1.0])
        assert np.allclose(H.sum(axis=0), 0.0)

    def test_path_flow_satisfies_conservation(self, diamond):
        """A path's unit flow satisfies H u = m"""
        u = path_flow(diamond, [1, 3, 4])
        assert np.allclose(u, [0.0, 1.0, 0.0, 1.0])
        assert np.allclose(build_incidence(diamond) @ u, build_od_vector(diamond, 1, 4))

    def test_od_vector_rejects_equal_endpoints(self, diamond):
        with pytest.raises(NetworkError):
            build_od_vector(diamond, 2, 2)

    def test_graph_view_keeps_arc_indices(self, diamond):
        graph = to_graph(diamond)
        assert graph.edges[1, 3]["index"] == 1
        assert graph.edges[1, 3]["free_flow"] == 2.0


class TestValidation:
    """Malformed networks raise NetworkError"""

    @pytest.mark.parametrize("net, message", [
        (TrafficNetwork(1, ((1, 1),), ((1, 1),)), "two nodes"),
        (TrafficNetwork(3, ((1, 2), (2, 5)), ((1, 2),)), "node 5"),
        (TrafficNetwork(3, ((1, 2), (2, 2)), ((1, 2),)), "self-loop"),
        (TrafficNetwork(4, ((1, 2), (3, 4)), ((1, 2),)), "not connected"),
        (TrafficNetwork(3, ((1, 2), (2, 3)), ((3, 1),)), "no directed path"),
        (TrafficNetwork(3, ((1, 2), (2, 3)), ((2, 2),)), "origin equal"),
        (TrafficNetwork(3, ((1, 2), (2, 3)), ((1, 3),), free_flow=(1.0, -1.0)), "positive"),
        (TrafficNetwork(3, ((1, 2), (2, 3)), ((1, 3),), free_flow=(1.0,)), "free-flow weights"),
    ])
    def test_rejected(self, net, message):
        with pytest.raises(NetworkError, match=message):
            validate_network(net)

    def test_missing_arc_in_path(self, diamond):
        with pytest.raises(NetworkError):
            path_flow(diamond, [1, 4])


class TestTrafficProblem:
    """Member sets and solutions on small networks"""

    def test_feasible_sets(self, diamond):
        """Bounds 0 <= u <= cap and conservation with the last node row dropped"""
        team = TeamParams([1.0], [0.5], [1.0])
        spec = build_traffic_problem(diamond, team, MemberParams.uniform(team, 1))
        P = spec.feasible[0]
        assert P.n_eq == 3
        assert P.n_ineq == 8
        assert capacity(diamond) == pytest.approx(10.0)
        assert P.contains(path_flow(diamond, [1, 2, 4]))

    def test_parallel_arcs_split(self):
        """Per-arc weights (1, 1) and free-flow scales (1, 2) put 3/4 of the flow on the first arc"""
        net = TrafficNetwork(2, ((1, 2), (1, 2)), ((1, 2),))
        team = TeamParams([1.0, 1.0], [0.3, 0.3], [1.0, 2.0])
        spec = build_traffic_problem(net, team, MemberParams.uniform(team, 1), parameterization="per_arc")
        optimum = solve_team_optimum(spec)
        assert np.allclose(optimum.point, [0.75, 0.25], atol=1e-8)

    def test_identical_vehicles_route_like_the_team(self, diamond):
        """Members with (alpha, 2 beta, gamma) reach the team optimum"""
        two = TrafficNetwork(4, diamond.arcs, ((1, 4), (1, 4)), diamond.free_flow)
        team = TeamParams([1.0], [0.5], [1.0])
        spec = build_traffic_problem(two, team, MemberParams.uniform(team, 2)).with_identical_preferences()
        assert np.allclose(solve_ne(spec).point, solve_team_optimum(spec).point, atol=1e-7)
