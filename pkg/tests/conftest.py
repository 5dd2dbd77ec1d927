"""Pytest configuration and shared fixtures"""
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pytest

from families.quadratic_family import QuadraticFamily
from models.domain_models import MemberParams, Polyhedron, ProblemSpec, TeamParams
from repositories.problem_repository import BUNDLED_PROBLEM, ProblemRepository


FIXTURES_DIR = Path(__file__).parent / "fixtures"


def random_quadratic_family(rng: np.random.Generator, N: int, n: int, coupling: float = 0.3) -> QuadraticFamily:
    """Q_i = A A'/n + I, cross blocks with B_ji = B_ij' and spectral norm at most `coupling`."""
    Q_basis = np.zeros((N, 1, n, n))
    for i in range(N):
        A = rng.standard_normal((n, n))
        Q_basis[i, 0] = A @ A.T / n + np.eye(n)
    B_basis = np.zeros((N, N, 1, n, n))
    for i in range(N):
        for j in range(i + 1, N):
            M = rng.standard_normal((n, n))
            M *= coupling / max(np.linalg.norm(M, 2), 1e-12)
            B_basis[i, j, 0] = M
            B_basis[j, i, 0] = M.T
    c_basis = rng.standard_normal((N, 1, n))
    return QuadraticFamily(Q_basis, B_basis, c_basis)


def random_member_params(rng: np.random.Generator, N: int) -> MemberParams:
    return MemberParams(tuple(
        TeamParams([rng.uniform(0.8, 1.5)], [rng.uniform(0.0, 1.0)], [rng.uniform(0.5, 2.0)])
        for _ in range(N)
    ))


@pytest.fixture
def make_quadratic_spec() -> Callable[..., ProblemSpec]:
    """Factory for random strongly monotone quadratic problems on [-1, 1]^n."""

    def build(
        seed: int,
        N: int = 2,
        n: int = 2,
        feasible: Optional[Polyhedron] = None,
        mediator_set: Optional[Polyhedron] = None,
    ) -> ProblemSpec:
        rng = np.random.default_rng(seed)
        family = random_quadratic_family(rng, N, n)
        team = TeamParams([1.0], [0.5], [1.0])
        members = random_member_params(rng, N)
        box = feasible or Polyhedron.box(-np.ones(n), np.ones(n))
        theta_set = mediator_set or Polyhedron.free(3 * N)
        return ProblemSpec(family, team, members, [box] * N, theta_set, name=f"random-{seed}")

    return build


@pytest.fixture
def problem_repository() -> ProblemRepository:
    return ProblemRepository()


@pytest.fixture
def affine_spec(problem_repository) -> ProblemSpec:
    """Two members on the plane u1 + u2 + u3 = 1, no inequalities."""
    return problem_repository.load_problem(FIXTURES_DIR / "affine_quadratic.json")


@pytest.fixture(scope="session")
def bundled_spec() -> ProblemSpec:
    return ProblemRepository().load_problem(BUNDLED_PROBLEM)


@pytest.fixture
def small_grid_path() -> Path:
    return FIXTURES_DIR / "small_grid.json"
