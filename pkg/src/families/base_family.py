"""
Abstract cost family interface.
"""

from abc import ABC, abstractmethod

import numpy as np

from exceptions.solver_exceptions import DimensionMismatchError, PreconditionError
from models.domain_models import MemberParams, ParamDims, TeamParams


class CostFamily(ABC):
    """
    Abstract base class for parameterized team/game cost families.

    A family fixes the member count N, the per-member decision dimension n and
    the parameter dimensions. Profiles are passed as (N, n) arrays; parameter
    triples are passed as TeamParams. Solvers only talk to this interface, so
    new families plug in without touching them.
    """

    tag: str = ""

    def __init__(self, n_members: int, dim: int, param_dims: ParamDims):
        self.n_members = n_members
        self.dim = dim
        self.param_dims = ParamDims(*param_dims)

    @property
    def is_quadratic(self) -> bool:
        """True when the Jacobians of F and G are constant in u."""
        return False

    @abstractmethod
    def team_cost(self, team: TeamParams, U: np.ndarray) -> float:
        """
        Evaluate the team cost.

        Args:
            team: Team parameters (alpha, beta, gamma)
            U: Profile of shape (N, n)

        Returns:
            Scalar team cost
        """
        pass

    @abstractmethod
    def member_cost(self, i: int, params: TeamParams, U: np.ndarray) -> float:
        """
        Evaluate member i's cost under the given (already adjusted) parameters.

        Args:
            i: Member index (0-based)
            params: Member parameters after adjustment
            U: Profile of shape (N, n)

        Returns:
            Scalar member cost
        """
        pass

    @abstractmethod
    def team_grad(self, team: TeamParams, U: np.ndarray) -> np.ndarray:
        """Team gradient map G(u) as an (N, n) array, cross terms included."""
        pass

    @abstractmethod
    def pseudo_grad(self, members: MemberParams, U: np.ndarray) -> np.ndarray:
        """Stacked own-gradients of the member costs as an (N, n) array."""
        pass

    @abstractmethod
    def jac_u_pseudo(self, members: MemberParams, U: np.ndarray) -> np.ndarray:
        """J_u F as an (N n, N n) matrix."""
        pass

    @abstractmethod
    def jac_params_pseudo(self, members: MemberParams, U: np.ndarray) -> np.ndarray:
        """
        Derivative of F with respect to the stacked member parameters.

        Returns:
            (N n, N d) matrix; member i's rows only depend on member i's block
        """
        pass

    @abstractmethod
    def jac_u_team(self, team: TeamParams, U: np.ndarray) -> np.ndarray:
        """J_u G (the team Hessian) as an (N n, N n) matrix."""
        pass

    def validate_params(self, team: TeamParams, members: MemberParams) -> None:
        """
        Check parameter dimensions and family-specific invariants.

        Raises:
            DimensionMismatchError: If dimensions disagree with the family
            PreconditionError: If a family invariant fails
        """
        if team.dims != self.param_dims:
            raise DimensionMismatchError(
                f"team parameter dims {tuple(team.dims)} do not match family dims {tuple(self.param_dims)}"
            )
        for i, p in enumerate(members):
            if p.dims != self.param_dims:
                raise DimensionMismatchError(
                    f"member {i} parameter dims {tuple(p.dims)} do not match family dims {tuple(self.param_dims)}",
                    member=i,
                )

    def aligned_member_params(self, team: TeamParams) -> TeamParams:
        """Member parameters whose pseudo-gradient equals the team gradient."""
        raise PreconditionError(f"{self.tag} family has no closed-form aligned member parameters")

    def describe(self) -> dict:
        return {
            "family": self.tag,
            "members": self.n_members,
            "dim": self.dim,
            "param_dims": list(self.param_dims),
        }

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(N={self.n_members}, n={self.dim}, dims={tuple(self.param_dims)})"
