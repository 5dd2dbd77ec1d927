"""
Power-control game with signal-to-interference costs.

Each member picks a scalar transmit power u_i. With interference
I_i(u) = sum_{j != i} h_j u_j + noise, member i pays

    C_i = -beta_i h_i u_i / I_i + gamma_i u_i

and the team pays the sum of those terms under the team's (beta, gamma).
There is no alpha component.
"""

from typing import Sequence

import numpy as np

from exceptions.solver_exceptions import DimensionMismatchError, PreconditionError
from families.base_family import CostFamily
from models.domain_models import MemberParams, ParamDims, TeamParams


class SinrFamily(CostFamily):
    tag = "sinr"

    def __init__(self, gains: Sequence[float], noise: float):
        h = np.asarray(gains, dtype=float).reshape(-1)
        if h.size < 1:
            raise DimensionMismatchError("at least one channel gain is required")
        if np.any(h <= 0):
            raise PreconditionError("channel gains must be positive")
        if not noise > 0:
            raise PreconditionError("noise power must be positive")
        super().__init__(h.size, 1, ParamDims(0, 1, 1))
        self.gains = h
        self.noise = float(noise)

    def interference(self, U: np.ndarray) -> np.ndarray:
        u = U.reshape(-1)
        hu = self.gains * u
        return hu.sum() - hu + self.noise

    def team_cost(self, team: TeamParams, U: np.ndarray) -> float:
        u = U.reshape(-1)
        I = self.interference(U)
        beta, gamma = team.beta[0], team.gamma[0]
        return float(np.sum(-beta * self.gains * u / I + gamma * u))

    def member_cost(self, i: int, params: TeamParams, U: np.ndarray) -> float:
        u = U.reshape(-1)
        I = self.interference(U)
        return float(-params.beta[0] * self.gains[i] * u[i] / I[i] + params.gamma[0] * u[i])

    def team_grad(self, team: TeamParams, U: np.ndarray) -> np.ndarray:
        u = U.reshape(-1)
        h = self.gains
        I = self.interference(U)
        beta, gamma = team.beta[0], team.gamma[0]
        # sum over k != i of h_k u_k / I_k^2
        load = h * u / I**2
        spill = load.sum() - load
        return (-beta * h / I + gamma + beta * h * spill).reshape(-1, 1)

    def pseudo_grad(self, members: MemberParams, U: np.ndarray) -> np.ndarray:
        I = self.interference(U)
        beta = np.array([p.beta[0] for p in members])
        gamma = np.array([p.gamma[0] for p in members])
        return (-beta * self.gains / I + gamma).reshape(-1, 1)

    def jac_u_pseudo(self, members: MemberParams, U: np.ndarray) -> np.ndarray:
        h = self.gains
        I = self.interference(U)
        beta = np.array([p.beta[0] for p in members])
        J = (beta * h / I**2)[:, None] * h[None, :]
        np.fill_diagonal(J, 0.0)
        return J

    def jac_params_pseudo(self, members: MemberParams, U: np.ndarray) -> np.ndarray:
        N = self.n_members
        I = self.interference(U)
        J = np.zeros((N, 2 * N))
        J[np.arange(N), 2 * np.arange(N)] = -self.gains / I
        J[np.arange(N), 2 * np.arange(N) + 1] = 1.0
        return J

    def jac_u_team(self, team: TeamParams, U: np.ndarray) -> np.ndarray:
        u = U.reshape(-1)
        h = self.gains
        N = self.n_members
        I = self.interference(U)
        beta = team.beta[0]
        off = 1.0 - np.eye(N)

        direct = off * (h[:, None] * h[None, :] / I[:, None] ** 2)
        first = off * (h[None, :] / I[None, :] ** 2)
        # cubic[i, j] = sum over k not in {i, j} of h_k u_k / I_k^3
        cube = h * u / I**3
        cubic = cube.sum() - cube[:, None] - cube[None, :]
        np.fill_diagonal(cubic, cube.sum() - cube)
        second = first - 2.0 * h[None, :] * cubic
        return beta * direct + beta * h[:, None] * second

    def validate_params(self, team: TeamParams, members: MemberParams) -> None:
        super().validate_params(team, members)
        if not team.beta[0] > 0 or team.gamma[0] < 0:
            raise PreconditionError("team needs beta > 0 and gamma >= 0")
        for i, p in enumerate(members):
            if not p.beta[0] > 0 or p.gamma[0] < 0:
                raise PreconditionError(f"member {i} needs beta > 0 and gamma >= 0")

    def describe(self) -> dict:
        info = super().describe()
        info.update(gains=self.gains.tolist(), noise=self.noise)
        return info
