"""
Linear-quadratic cost families.

Team cost:   sum_i u_i' Q_i(alpha) u_i + sum_{j!=i} u_i' B_ij(beta) u_j + c_i(gamma)' u_i  (+ offset(gamma))
Member cost: u_i' Q_i(alpha_i) u_i + sum_{j!=i} u_i' B_ij(beta_i) u_j + c_i(gamma_i)' u_i

with basis expansions Q_i(alpha) = sum_l alpha_l Q_{i,l}, B_ij(beta) = sum_l beta_l B_{ij,l}
and c_i(gamma) = sum_l gamma_l c_{i,l}.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from exceptions.solver_exceptions import DimensionMismatchError, PreconditionError
from families.base_family import CostFamily
from models.domain_models import MemberParams, ParamDims, TeamParams, TrafficNetwork

logger = logging.getLogger(__name__)


class QuadraticFamily(CostFamily):
    tag = "quadratic"

    def __init__(
        self,
        Q_basis: np.ndarray,
        B_basis: np.ndarray,
        c_basis: np.ndarray,
        offset_basis: Optional[np.ndarray] = None,
    ):
        Q_basis = np.asarray(Q_basis, dtype=float)
        B_basis = np.asarray(B_basis, dtype=float)
        c_basis = np.asarray(c_basis, dtype=float)
        if Q_basis.ndim != 4 or Q_basis.shape[2] != Q_basis.shape[3]:
            raise DimensionMismatchError(f"Q basis must have shape (N, d_alpha, n, n), got {Q_basis.shape}")
        N, d_alpha, n, _ = Q_basis.shape
        if B_basis.ndim != 5 or B_basis.shape[:2] != (N, N) or B_basis.shape[3:] != (n, n):
            raise DimensionMismatchError(f"B basis must have shape (N, N, d_beta, n, n), got {B_basis.shape}")
        if c_basis.ndim != 3 or c_basis.shape[0] != N or c_basis.shape[2] != n:
            raise DimensionMismatchError(f"c basis must have shape (N, d_gamma, n), got {c_basis.shape}")
        d_beta, d_gamma = B_basis.shape[2], c_basis.shape[1]
        super().__init__(N, n, ParamDims(d_alpha, d_beta, d_gamma))

        off_diag = 1.0 - np.eye(N)
        self.Q_basis = Q_basis
        self.B_basis = B_basis * off_diag[:, :, None, None, None]
        self.c_basis = c_basis
        self.offset_basis = (
            np.zeros(d_gamma) if offset_basis is None else np.asarray(offset_basis, dtype=float).reshape(d_gamma)
        )
        self._check_structure()

    @property
    def is_quadratic(self) -> bool:
        return True

    def _check_structure(self) -> None:
        if not np.allclose(self.Q_basis, np.swapaxes(self.Q_basis, -1, -2), atol=1e-12):
            raise PreconditionError("Q basis matrices must be symmetric")
        # B_ji,l must equal B_ij,l transposed for the closed-form adjustment to align gradients
        mirrored = np.swapaxes(np.swapaxes(self.B_basis, 0, 1), -1, -2)
        if not np.allclose(self.B_basis, mirrored, atol=1e-12):
            raise PreconditionError("B basis must satisfy B_ji,l = B_ij,l^T")

    # -- parameter maps -----------------------------------------------------

    def Q_of(self, i: int, alpha: np.ndarray) -> np.ndarray:
        return np.tensordot(alpha, self.Q_basis[i], axes=(0, 0))

    def B_of(self, i: int, beta: np.ndarray) -> np.ndarray:
        """All blocks B_ij(beta) of member i, shape (N, n, n); block i is zero."""
        return np.tensordot(beta, self.B_basis[i], axes=(0, 1))

    def c_of(self, i: int, gamma: np.ndarray) -> np.ndarray:
        return gamma @ self.c_basis[i]

    def _team_blocks(self, team: TeamParams):
        Qs = np.einsum("l,ilab->iab", team.alpha, self.Q_basis)
        Bs = np.einsum("l,ijlab->ijab", team.beta, self.B_basis)
        cs = np.einsum("l,ila->ia", team.gamma, self.c_basis)
        return Qs, Bs, cs

    # -- costs --------------------------------------------------------------

    def team_cost(self, team: TeamParams, U: np.ndarray) -> float:
        Qs, Bs, cs = self._team_blocks(team)
        own = np.einsum("ia,iab,ib->", U, Qs, U)
        cross = np.einsum("ia,ijab,jb->", U, Bs, U)
        return float(own + cross + np.sum(cs * U) + self.offset_basis @ team.gamma)

    def member_cost(self, i: int, params: TeamParams, U: np.ndarray) -> float:
        Q = self.Q_of(i, params.alpha)
        B = self.B_of(i, params.beta)
        c = self.c_of(i, params.gamma)
        return float(U[i] @ Q @ U[i] + U[i] @ np.einsum("jab,jb->a", B, U) + c @ U[i])

    def team_grad(self, team: TeamParams, U: np.ndarray) -> np.ndarray:
        Qs, Bs, cs = self._team_blocks(team)
        own = np.einsum("iab,ib->ia", Qs + np.swapaxes(Qs, -1, -2), U)
        cross = np.einsum("ijab,jb->ia", Bs, U) + np.einsum("jiba,jb->ia", Bs, U)
        return own + cross + cs

    def pseudo_grad(self, members: MemberParams, U: np.ndarray) -> np.ndarray:
        F = np.empty_like(U, dtype=float)
        for i, p in enumerate(members):
            Q = self.Q_of(i, p.alpha)
            B = self.B_of(i, p.beta)
            F[i] = (Q + Q.T) @ U[i] + np.einsum("jab,jb->a", B, U) + self.c_of(i, p.gamma)
        return F

    # -- Jacobians ----------------------------------------------------------

    def jac_u_pseudo(self, members: MemberParams, U: np.ndarray) -> np.ndarray:
        N, n = self.n_members, self.dim
        J = np.zeros((N * n, N * n))
        for i, p in enumerate(members):
            Q = self.Q_of(i, p.alpha)
            B = self.B_of(i, p.beta)
            rows = slice(i * n, (i + 1) * n)
            J[rows] = np.hstack(list(B))
            J[rows, rows] = Q + Q.T
        return J

    def jac_params_pseudo(self, members: MemberParams, U: np.ndarray) -> np.ndarray:
        N, n = self.n_members, self.dim
        d = self.param_dims.total
        da, db = self.param_dims.alpha, self.param_dims.beta
        J = np.zeros((N * n, N * d))
        for i in range(N):
            rows = slice(i * n, (i + 1) * n)
            col = i * d
            Qi = self.Q_basis[i]
            J[rows, col:col + da] = np.einsum("lab,b->al", Qi + np.swapaxes(Qi, -1, -2), U[i])
            J[rows, col + da:col + da + db] = np.einsum("jlab,jb->al", self.B_basis[i], U)
            J[rows, col + da + db:col + d] = self.c_basis[i].T
        return J

    def jac_u_team(self, team: TeamParams, U: np.ndarray) -> np.ndarray:
        N, n = self.n_members, self.dim
        Qs, Bs, _ = self._team_blocks(team)
        blocks = Bs + np.swapaxes(np.swapaxes(Bs, 0, 1), -1, -2)
        for i in range(N):
            blocks[i, i] = Qs[i] + Qs[i].T
        return blocks.transpose(0, 2, 1, 3).reshape(N * n, N * n)

    # -- invariants ---------------------------------------------------------

    def validate_params(self, team: TeamParams, members: MemberParams) -> None:
        super().validate_params(team, members)
        self._require_positive_definite(team, "team")
        for i, p in enumerate(members):
            self._require_positive_definite(p, f"member {i}")

    def _require_positive_definite(self, params: TeamParams, owner: str) -> None:
        for i in range(self.n_members):
            Q = self.Q_of(i, params.alpha)
            smallest = float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[0])
            if not smallest > 0:
                raise PreconditionError(
                    f"{owner}: Q_{i}(alpha) is not positive definite (smallest eigenvalue {smallest:.3e})"
                )

    def aligned_member_params(self, team: TeamParams) -> TeamParams:
        return TeamParams(team.alpha.copy(), 2.0 * team.beta, team.gamma.copy())

    def describe(self) -> dict:
        info = super().describe()
        info.update(
            Q_basis=self.Q_basis.tolist(),
            B_basis=self.B_basis.tolist(),
            c_basis=self.c_basis.tolist(),
            offset_basis=self.offset_basis.tolist(),
        )
        return info


class TrafficFamily(QuadraticFamily):
    """
    Quadratic family over network arcs.

    Scalar parameterization: Q(alpha) = alpha I, Q(beta) = beta I, linear term gamma * w.
    Per-arc parameterization: Q(alpha) = diag(alpha), Q(beta) = diag(beta), linear term diag(w) gamma.
    w holds the free-flow weights of the arcs.
    """

    tag = "traffic"

    def __init__(
        self,
        n_arcs: int,
        n_members: int,
        free_flow: Sequence[float],
        parameterization: str = "scalar",
        network: Optional[TrafficNetwork] = None,
    ):
        w = np.asarray(free_flow, dtype=float)
        if w.size != n_arcs:
            raise DimensionMismatchError(f"{w.size} free-flow weights for {n_arcs} arcs")
        if parameterization not in ("scalar", "per_arc"):
            raise PreconditionError(f"unknown traffic parameterization {parameterization!r}")
        N, n = n_members, n_arcs
        pair = (1.0 - np.eye(N))[:, :, None, None, None]
        if parameterization == "scalar":
            Q_basis = np.broadcast_to(np.eye(n), (N, 1, n, n)).copy()
            B_basis = pair * np.eye(n)[None, None, None]
            c_basis = np.broadcast_to(w, (N, 1, n)).copy()
        else:
            unit = np.zeros((n, n, n))
            unit[np.arange(n), np.arange(n), np.arange(n)] = 1.0
            Q_basis = np.broadcast_to(unit, (N, n, n, n)).copy()
            B_basis = pair * unit[None, None]
            c_basis = np.broadcast_to(np.diag(w), (N, n, n)).copy()
        self.free_flow = w
        self.parameterization = parameterization
        # None when built from arc counts alone
        self.network = network
        super().__init__(Q_basis, B_basis, c_basis)

    def validate_params(self, team: TeamParams, members: MemberParams) -> None:
        super().validate_params(team, members)
        for owner, p in [("team", team)] + [(f"member {i}", p) for i, p in enumerate(members)]:
            if np.any(p.alpha <= 0) or np.any(p.beta <= 0):
                raise PreconditionError(f"{owner}: traffic congestion coefficients must be positive")

    def describe(self) -> dict:
        return {
            "family": self.tag,
            "members": self.n_members,
            "dim": self.dim,
            "param_dims": list(self.param_dims),
            "parameterization": self.parameterization,
            "free_flow": self.free_flow.tolist(),
        }


class LqrReducedFamily(QuadraticFamily):
    """
    One-shot view of a finite-horizon LQR game.

    Reduced parameters relate to the raw weights by
    alpha = (alpha~, beta~), beta = alpha~, gamma = alpha~.
    """

    tag = "lqr"

    def __init__(self, Q_basis, B_basis, c_basis, offset_basis, raw_dims):
        self.raw_dims = tuple(raw_dims)
        super().__init__(Q_basis, B_basis, c_basis, offset_basis)

    def reduce_params(self, alpha_tilde: np.ndarray, beta_tilde: np.ndarray) -> TeamParams:
        alpha_tilde = np.asarray(alpha_tilde, dtype=float)
        beta_tilde = np.asarray(beta_tilde, dtype=float)
        return TeamParams(np.concatenate([alpha_tilde, beta_tilde]), alpha_tilde.copy(), alpha_tilde.copy())

    def raw_params(self, params: TeamParams):
        d_alpha_tilde = self.raw_dims[0]
        return params.alpha[:d_alpha_tilde], params.alpha[d_alpha_tilde:]
