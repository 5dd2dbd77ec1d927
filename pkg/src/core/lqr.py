"""
Finite-horizon LQR games rewritten as one-shot quadratic problems.

Stacking the states X = (x_0, ..., x_T) gives X = Phi x0 + sum_i Gamma_i U_i,
so every stage cost becomes a quadratic form in the stacked controls U_i.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import block_diag

from exceptions.solver_exceptions import ReductionError
from families.quadratic_family import LqrReducedFamily
from models.domain_models import LqrSpec, MemberParams, Polyhedron, ProblemSpec, TeamParams

logger = logging.getLogger(__name__)


def _free_response(lqr: LqrSpec) -> np.ndarray:
    """Phi: stacked powers A^0 .. A^T, shape (p (T+1), p)."""
    p, T = lqr.state_dim, lqr.horizon
    blocks = [np.eye(p)]
    for _ in range(T):
        blocks.append(lqr.A @ blocks[-1])
    return np.vstack(blocks)


def _input_response(lqr: LqrSpec, B_i: np.ndarray) -> np.ndarray:
    """Gamma_i: block (t, s) = A^(t-1-s) B_i for s < t, shape (p (T+1), m T)."""
    p, m, T = lqr.state_dim, lqr.input_dim, lqr.horizon
    powers = [np.eye(p)]
    for _ in range(T):
        powers.append(lqr.A @ powers[-1])
    Gamma = np.zeros((p * (T + 1), m * T))
    for t in range(1, T + 1):
        for s in range(t):
            Gamma[t * p:(t + 1) * p, s * m:(s + 1) * m] = powers[t - 1 - s] @ B_i
    return Gamma


def _stacked_state_weights(lqr: LqrSpec) -> np.ndarray:
    """Q-bar_l = blkdiag(Q_l, ..., Q_l, Qf_l) for every basis index l."""
    T = lqr.horizon
    return np.array([
        block_diag(*([Q] * T + [Qf])) for Q, Qf in zip(lqr.Q_basis, lqr.Qf_basis)
    ])


def simulate_lqr_cost(
    lqr: LqrSpec,
    controls: Sequence[np.ndarray],
    alpha_tilde: Optional[np.ndarray] = None,
    beta_tilde: Optional[np.ndarray] = None,
) -> float:
    """
    Roll the dynamics forward and add up the stage costs.

    Args:
        lqr: LQR game
        controls: Per member an array of shape (T, m) (or its flattening)
        alpha_tilde: State-weight parameters, the team's by default
        beta_tilde: Input-weight parameters, the team's by default

    Returns:
        sum_t x_t' Q x_t + x_T' Q_f x_T + sum_i sum_t u_it' R_i u_it
    """
    a = lqr.team_alpha if alpha_tilde is None else np.asarray(alpha_tilde, dtype=float)
    b = lqr.team_beta if beta_tilde is None else np.asarray(beta_tilde, dtype=float)
    T, m = lqr.horizon, lqr.input_dim
    Q = np.tensordot(a, lqr.Q_basis, axes=(0, 0))
    Qf = np.tensordot(a, lqr.Qf_basis, axes=(0, 0))
    R = [np.tensordot(b, lqr.R_basis[i], axes=(0, 0)) for i in range(lqr.n_members)]
    U = [np.asarray(c, dtype=float).reshape(T, m) for c in controls]

    x = lqr.x0.copy()
    cost = 0.0
    for t in range(T):
        cost += x @ Q @ x
        for i in range(lqr.n_members):
            cost += U[i][t] @ R[i] @ U[i][t]
        x = lqr.A @ x + sum(lqr.B[i] @ U[i][t] for i in range(lqr.n_members))
    return float(cost + x @ Qf @ x)


def build_lqr_reduction(lqr: LqrSpec, check_samples: int = 8, seed: int = 0) -> ProblemSpec:
    """
    One-shot quadratic view of an LQR game.

    Reduced parameters: alpha = (alpha~, beta~), beta = alpha~, gamma = alpha~
    for the team. A member whose own cost is the full stacked cost under its
    weights (alpha~_i, beta~_i) gets beta_i = 2 alpha~_i, since its gradient
    picks up both halves of the symmetric cross term.

    Raises:
        ReductionError: If the reduced cost disagrees with the simulated cost
    """
    N, T, m = lqr.n_members, lqr.horizon, lqr.input_dim
    d_alpha_tilde, d_beta_tilde = lqr.team_alpha.size, lqr.team_beta.size

    Phi = _free_response(lqr)
    Gammas = [_input_response(lqr, B_i) for B_i in lqr.B]
    Qbar = _stacked_state_weights(lqr)
    free = Phi @ lqr.x0
    nT = m * T

    Q_basis = np.zeros((N, d_alpha_tilde + d_beta_tilde, nT, nT))
    B_basis = np.zeros((N, N, d_alpha_tilde, nT, nT))
    c_basis = np.zeros((N, d_alpha_tilde, nT))
    for i in range(N):
        for l in range(d_alpha_tilde):
            Q_basis[i, l] = Gammas[i].T @ Qbar[l] @ Gammas[i]
            c_basis[i, l] = 2.0 * Gammas[i].T @ Qbar[l] @ free
            for j in range(N):
                if j != i:
                    B_basis[i, j, l] = Gammas[i].T @ Qbar[l] @ Gammas[j]
        for k in range(d_beta_tilde):
            Q_basis[i, d_alpha_tilde + k] = np.kron(np.eye(T), lqr.R_basis[i, k])
    offset_basis = np.array([free @ Qbar[l] @ free for l in range(d_alpha_tilde)])

    # symmetrize away round-off before the family checks exact symmetry
    Q_basis = 0.5 * (Q_basis + np.swapaxes(Q_basis, -1, -2))
    family = LqrReducedFamily(Q_basis, B_basis, c_basis, offset_basis, (d_alpha_tilde, d_beta_tilde))

    team = family.reduce_params(lqr.team_alpha, lqr.team_beta)
    members = MemberParams(tuple(
        TeamParams(np.concatenate([a, b]), 2.0 * a, a.copy())
        for a, b in zip(lqr.member_alpha, lqr.member_beta)
    ))

    if lqr.control_bound is not None:
        feasible = [Polyhedron.box(np.full(nT, -lqr.control_bound), np.full(nT, lqr.control_bound))] * N
    else:
        feasible = [Polyhedron.free(nT)] * N
    theta_dim = family.param_dims.total * N
    spec = ProblemSpec(family, team, members, feasible, Polyhedron.free(theta_dim), name="lqr")

    rng = np.random.default_rng(seed)
    for _ in range(check_samples):
        U = rng.standard_normal((N, nT))
        reduced = family.team_cost(team, U)
        simulated = simulate_lqr_cost(lqr, list(U))
        if abs(reduced - simulated) > 1e-9 * (1.0 + abs(simulated)):
            raise ReductionError(
                f"one-shot cost {reduced!r} disagrees with simulated cost {simulated!r}"
            )
    logger.debug(f"LQR reduction verified on {check_samples} random control stacks")
    return spec
