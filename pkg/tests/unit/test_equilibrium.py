"""Unit tests for the projected-gradient solvers and the equilibrium sensitivity"""
import logging

import numpy as np
import pytest

from core.costs import grad_team, jacobian_of_G, jacobians_of_F, operator_constants, pseudo_grad
from core.equilibrium import (
    fixed_point_residual,
    ne_jacobian,
    ne_jacobian_direct,
    rate_bound,
    residual_map,
    solve_ne,
    solve_team_optimum,
    tau_window,
)
from exceptions.solver_exceptions import NonConvergenceError
from models.domain_models import Polyhedron, SolutionKind, SolverConfig


class TestStepsize:
    """Stepsize window and rate bound"""

    def test_window_and_rate(self):
        """tau = kappa / nu^2 gives rate sqrt(1 - kappa^2 / nu^2)"""
        kappa, nu = 1.0, 2.0
        assert tau_window(kappa, nu) == (0.0, 0.5)
        assert rate_bound(0.25, kappa, nu) == pytest.approx(np.sqrt(1 - 0.25))

    def test_rate_is_one_at_window_edge(self):
        """The contraction vanishes at tau = 2 kappa / nu^2"""
        assert rate_bound(0.5, 1.0, 2.0) == pytest.approx(1.0)


class TestSolvers:
    """Nash equilibrium and team optimum"""

    def test_unconstrained_solutions_solve_linear_systems(self, make_quadratic_spec):
        """Without constraints, F(u) = 0 at the NE and G(u) = 0 at the optimum"""
        spec = make_quadratic_spec(seed=11, N=3, n=2, feasible=Polyhedron.free(2))
        zero = np.zeros(6)
        J_F, _ = jacobians_of_F(spec, None, zero)
        expected_ne = np.linalg.solve(J_F, -pseudo_grad(spec, None, zero))
        expected_opt = np.linalg.solve(jacobian_of_G(spec, zero), -grad_team(spec, zero))

        ne = solve_ne(spec)
        optimum = solve_team_optimum(spec)
        assert ne.kind == SolutionKind.NE
        assert optimum.kind == SolutionKind.TEAM_OPT
        assert np.allclose(ne.point, expected_ne, atol=1e-8)
        assert np.allclose(optimum.point, expected_opt, atol=1e-8)

    @pytest.mark.parametrize("seed", [21, 22, 23])
    def test_solutions_are_fixed_points(self, make_quadratic_spec, seed):
        """Box-constrained solutions satisfy their fixed-point equations"""
        spec = make_quadratic_spec(seed=seed, N=2, n=3)
        ne = solve_ne(spec)
        assert fixed_point_residual(spec, None, ne.point, ne.tau) <= 1e-9
        optimum = solve_team_optimum(spec)
        assert np.linalg.norm(residual_map(spec, optimum.point)) <= 1e-10 / min(optimum.tau, 1.0) + 1e-12

    @pytest.mark.parametrize("seed", range(31, 51))
    def test_observed_rate_respects_bound(self, make_quadratic_spec, seed):
        """||u_k+1 - u*|| <= mu ||u_k - u*|| once the error is above round-off"""
        spec = make_quadratic_spec(seed=seed, N=4, n=5)
        ne = solve_ne(spec, cfg=SolverConfig.from_defaults(record_trace=True))
        assert ne.rate_bound is not None and ne.rate_bound < 1
        errors = [np.linalg.norm(u - ne.point) for u in ne.iterates]
        for k in range(5, len(errors) - 1):
            if errors[k] > 1e-4:
                assert errors[k + 1] <= (ne.rate_bound + 0.02) * errors[k]

    def test_certified_tau_minimizes_rate(self, make_quadratic_spec):
        """The default stepsize is kappa / nu^2 for quadratic families"""
        spec = make_quadratic_spec(seed=32)
        kappa, nu, certified = operator_constants(spec, None, "F")
        assert certified
        assert solve_ne(spec).tau == pytest.approx(kappa / nu**2)

    def test_tau_outside_window_warns(self, make_quadratic_spec, caplog):
        """A stepsize past 2 kappa / nu^2 is accepted with a warning"""
        spec = make_quadratic_spec(seed=33)
        kappa, nu, _ = operator_constants(spec, None, "F")
        cfg = SolverConfig.from_defaults(tau=1.05 * 2.0 * kappa / nu**2, max_iter=50)
        with caplog.at_level(logging.WARNING, logger="core.equilibrium"):
            try:
                solve_ne(spec, cfg=cfg)
            except NonConvergenceError:
                pass
        assert any("contraction window" in r.getMessage() for r in caplog.records)

    def test_iteration_cap_raises(self, make_quadratic_spec):
        """Hitting max_iter raises NonConvergenceError with the residual trace"""
        spec = make_quadratic_spec(seed=34)
        with pytest.raises(NonConvergenceError) as info:
            solve_ne(spec, cfg=SolverConfig.from_defaults(max_iter=2, tol=1e-14))
        assert len(info.value.residual_trace) == 3
        assert info.value.residual > 0

    def test_warm_start_reaches_same_point(self, make_quadratic_spec):
        """The NE does not depend on the starting profile"""
        spec = make_quadratic_spec(seed=35, N=2, n=3)
        cold = solve_ne(spec)
        warm = solve_ne(spec, u0=np.full(6, 0.9))
        assert np.allclose(cold.point, warm.point, atol=1e-8)


class TestSensitivity:
    """Jacobian of the equilibrium map theta -> u(theta)"""

    CFG = SolverConfig.from_defaults(tol=1e-12)
    FD_CFG = SolverConfig.from_defaults(tol=1e-13)

    @pytest.mark.parametrize("seed", [41, 42, 43, 44])
    def test_recursion_matches_finite_differences(self, make_quadratic_spec, seed):
        """Central differences of u(theta) agree with the recursion"""
        spec = make_quadratic_spec(seed=seed, N=2, n=2)
        theta = np.random.default_rng(seed).normal(scale=0.05, size=spec.theta_dim)
        ne = solve_ne(spec, theta, self.CFG)
        sens = ne_jacobian(spec, theta, ne, self.CFG)
        if sens.used_conservative_fallback:
            pytest.skip("equilibrium sits on a weakly active constraint")
        assert sens.converged

        h = 1e-4
        fd = np.zeros_like(sens.J)
        for k in range(spec.theta_dim):
            e = np.zeros(spec.theta_dim)
            e[k] = h
            plus = solve_ne(spec, theta + e, self.FD_CFG, u0=ne.point).point
            minus = solve_ne(spec, theta - e, self.FD_CFG, u0=ne.point).point
            fd[:, k] = (plus - minus) / (2 * h)
        assert np.allclose(sens.J, fd, rtol=1e-4, atol=1e-6)

    @pytest.mark.parametrize("seed", [51, 52, 53])
    def test_recursion_matches_direct_solve(self, make_quadratic_spec, seed):
        """The fixed-point recursion and the linear solve give the same Jacobian"""
        spec = make_quadratic_spec(seed=seed, N=3, n=2)
        ne = solve_ne(spec, None, self.CFG)
        recursive = ne_jacobian(spec, None, ne, self.CFG)
        direct = ne_jacobian_direct(spec, None, ne)
        assert np.allclose(recursive.J, direct.J, atol=1e-8)
        assert direct.residual <= 1e-10

    def test_interior_equilibrium_sensitivity(self, make_quadratic_spec):
        """Unconstrained games have J = -(J_u F)^-1 J_theta F"""
        spec = make_quadratic_spec(seed=55, feasible=Polyhedron.free(2))
        ne = solve_ne(spec, None, self.CFG)
        J_u, J_theta = jacobians_of_F(spec, None, ne.point)
        expected = -np.linalg.solve(J_u, J_theta)
        assert np.allclose(ne_jacobian(spec, None, ne, self.CFG).J, expected, atol=1e-8)
