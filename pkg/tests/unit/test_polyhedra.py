"""Unit tests for polyhedral projection, its derivative and set validation"""
import numpy as np
import pytest

from core.polyhedra import (
    project,
    projection_jacobian,
    projection_jacobian_conservative,
    projection_jacobian_safe,
    sample_points,
    validate,
)
from exceptions.solver_exceptions import DegenerateActiveSetError, PolyhedronValidationError, ProjectionError
from models.domain_models import Polyhedron


def _box():
    return Polyhedron.box([-1.0, 0.0, -2.0], [1.0, 0.5, 2.0])


def _simplex():
    return Polyhedron(-np.eye(3), np.zeros(3), np.ones((1, 3)), [1.0])


def _capped_plane():
    return Polyhedron(np.vstack([np.eye(3), -np.eye(3)]), np.r_[np.ones(3), np.zeros(3)], np.ones((1, 3)), [1.5])


SETS = {"box": _box, "simplex": _simplex, "capped-plane": _capped_plane}


@pytest.fixture(params=sorted(SETS))
def polyhedron(request):
    return SETS[request.param]()


@pytest.fixture
def points():
    return np.random.default_rng(7).normal(scale=2.0, size=(40, 3))


class TestProjection:
    """Euclidean projection onto boxes and general polyhedra"""

    def test_projection_is_feasible(self, polyhedron, points):
        """Projected points satisfy every constraint"""
        for x in points:
            assert polyhedron.contains(project(polyhedron, x).point, tol=1e-9)

    def test_projection_is_idempotent(self, polyhedron, points):
        """Projecting a projected point returns it unchanged"""
        for x in points:
            y = project(polyhedron, x).point
            assert np.allclose(project(polyhedron, y).point, y, atol=1e-10)

    def test_projection_is_nonexpansive(self, polyhedron, points):
        """||Pi(x) - Pi(z)|| <= ||x - z||"""
        for x, z in zip(points[:-1], points[1:]):
            gap = np.linalg.norm(project(polyhedron, x).point - project(polyhedron, z).point)
            assert gap <= np.linalg.norm(x - z) + 1e-10

    def test_kkt_identity(self, polyhedron, points):
        """x - Pi(x) = D' lambda + H' mu with lambda >= 0 and complementary slackness"""
        for x in points:
            result = project(polyhedron, x)
            y = result.point
            recovered = polyhedron.D.T @ result.multipliers + polyhedron.H.T @ result.eq_multipliers
            assert np.allclose(x - y, recovered, atol=1e-9)
            assert np.all(result.multipliers >= 0)
            assert np.allclose(result.multipliers * polyhedron.slack(y), 0.0, atol=1e-9)

    def test_known_simplex_projection(self):
        """(0.5, 0.5, -1) lands on the edge between the first two vertices"""
        y = project(_simplex(), np.array([0.5, 0.5, -1.0])).point
        assert np.allclose(y, [0.5, 0.5, 0.0])

    def test_box_projection_clips(self):
        """Boxes project by clipping each coordinate"""
        y = project(_box(), np.array([3.0, -1.0, 0.3])).point
        assert np.allclose(y, [1.0, 0.0, 0.3])

    def test_empty_polyhedron_raises(self):
        """Contradictory inequalities raise ProjectionError"""
        empty = Polyhedron(np.array([[1.0], [-1.0]]), [-1.0, -1.0], np.zeros((0, 1)), [])
        with pytest.raises(ProjectionError):
            project(empty, np.array([0.0]))


def _random_case(rng, kind):
    """A random set of the given kind together with feasible points built without projecting."""
    d = int(rng.integers(1 if kind == "box" else 2, 7))
    if kind == "box":
        lower = rng.normal(size=d)
        upper = lower + rng.uniform(0.0, 3.0, size=d)
        lower[rng.random(d) < 0.2] = -np.inf
        upper[rng.random(d) < 0.2] = np.inf
        anchor = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper - 1.0, 0.0))
        return Polyhedron.box(lower, upper), [anchor]
    if kind == "simplex":
        scale = rng.uniform(0.5, 3.0)
        P = Polyhedron(-np.eye(d), np.zeros(d), np.ones((1, d)), [scale])
        return P, [scale * rng.dirichlet(np.ones(d)), scale * np.eye(d)[0]]
    upper = rng.uniform(0.5, 2.0, size=d)
    weights = rng.uniform(0.5, 2.0, size=d)
    anchor = upper * rng.uniform(0.2, 0.8, size=d)
    P = Polyhedron(np.vstack([np.eye(d), -np.eye(d)]), np.r_[upper, np.zeros(d)], weights[None], [weights @ anchor])
    return P, [anchor]


@pytest.mark.slow
class TestRandomizedProjection:
    """Ten thousand random boxes, simplices and bounded equality sets"""

    def test_projection_optimality(self):
        """Feasible, KKT-consistent and no feasible point is closer"""
        rng = np.random.default_rng(2024)
        kinds = ("box", "simplex", "bounded-plane")
        for case in range(10_000):
            P, feasible = _random_case(rng, kinds[case % 3])
            x = rng.normal(scale=3.0, size=P.dim)
            result = project(P, x)
            y = result.point
            assert P.contains(y, tol=1e-8), (case, kinds[case % 3])
            recovered = P.D.T @ result.multipliers + P.H.T @ result.eq_multipliers
            assert np.allclose(x - y, recovered, atol=1e-8), case
            # Pi(x) minimizes the distance, so (x - y)'(z - y) <= 0 for feasible z
            for z in feasible:
                assert (x - y) @ (z - y) <= 1e-8 * (1.0 + x @ x), case


class TestProjectionJacobian:
    """Derivative of the projection"""

    def test_jacobian_is_orthogonal_projector(self, polyhedron, points):
        """Every returned element is symmetric and idempotent"""
        for x in points:
            J, _ = projection_jacobian_safe(polyhedron, project(polyhedron, x))
            assert np.allclose(J, J.T, atol=1e-10)
            assert np.allclose(J @ J, J, atol=1e-10)

    def test_jacobian_matches_finite_differences(self, polyhedron, points):
        """At smooth points the Jacobian agrees with difference quotients"""
        h = 1e-7
        for x in points:
            result = project(polyhedron, x)
            if not result.is_smooth_point:
                continue
            J = projection_jacobian(polyhedron, result)
            base = result.point
            for k in range(3):
                e = np.zeros(3)
                e[k] = h
                fd = (project(polyhedron, x + e).point - base) / h
                assert np.allclose(fd, J[:, k], atol=1e-5)

    def test_weakly_active_point_uses_conservative_element(self):
        """A point exactly on a face with zero multiplier is not smooth"""
        box = Polyhedron.box([0.0], [1.0])
        result = project(box, np.array([1.0]))
        assert not result.is_smooth_point
        with pytest.raises(DegenerateActiveSetError):
            projection_jacobian(box, result)
        J, used = projection_jacobian_safe(box, result)
        assert used
        assert np.allclose(J, projection_jacobian_conservative(box, result))
        assert np.allclose(J, 0.0)


class TestValidation:
    """Standing assumptions on feasible sets"""

    def test_valid_box(self):
        """A box has a Slater point and is compact"""
        cert = validate(Polyhedron.box([0.0, 0.0], [1.0, 1.0]))
        assert cert.compact
        assert cert.slater_margin > 0
        assert np.allclose(cert.lower_support, [0.0, 0.0])
        assert np.allclose(cert.upper_support, [1.0, 1.0])

    def test_empty_set_rejected(self):
        """x <= -1 and x >= 1 is empty"""
        with pytest.raises(PolyhedronValidationError, match="empty"):
            validate(Polyhedron(np.array([[1.0], [-1.0]]), [-1.0, -1.0], np.zeros((0, 1)), []))

    def test_missing_slater_point_rejected(self):
        """x <= 0 and x >= 0 has no interior"""
        with pytest.raises(PolyhedronValidationError, match="Slater"):
            validate(Polyhedron(np.array([[1.0], [-1.0]]), [0.0, 0.0], np.zeros((0, 1)), []))

    def test_unbounded_set_rejected(self):
        """A half-line fails compactness unless compactness is waived"""
        half_line = Polyhedron(np.array([[-1.0]]), [0.0], np.zeros((0, 1)), [])
        with pytest.raises(PolyhedronValidationError, match="unbounded"):
            validate(half_line)
        assert not validate(half_line, require_compact=False).compact

    def test_rank_deficient_equalities_rejected(self):
        """Repeated equality rows are reported"""
        P = Polyhedron(np.vstack([np.eye(2), -np.eye(2)]), np.r_[np.ones(2), np.zeros(2)],
                       np.array([[1.0, 1.0], [2.0, 2.0]]), [1.0, 2.0])
        with pytest.raises(PolyhedronValidationError, match="full row rank"):
            validate(P)

    def test_sample_points_are_feasible(self):
        """Sampled points lie in the set"""
        P = _capped_plane()
        for x in sample_points(P, 10, np.random.default_rng(0)):
            assert P.contains(x, tol=1e-9)
