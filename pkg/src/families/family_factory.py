"""
Factory for creating cost families from their tag.
"""

import logging

import numpy as np

from .base_family import CostFamily
from .quadratic_family import QuadraticFamily, TrafficFamily
from .sinr_family import SinrFamily

logger = logging.getLogger(__name__)


class FamilyFactory:
    """
    Factory class to create the cost family named by a problem file.

    Usage:
        family = FamilyFactory.get_family("quadratic", Q_basis=..., B_basis=..., c_basis=...)
        family = FamilyFactory.get_family("traffic", n_arcs=31, n_members=4, free_flow=w)
    """

    @staticmethod
    def get_family(tag: str, **kwargs) -> CostFamily:
        """
        Get the cost family for a tag.

        Args:
            tag: Family tag ('quadratic', 'traffic', 'sinr')
            **kwargs: Family data
                - Q_basis, B_basis, c_basis, offset_basis: quadratic
                - n_arcs, n_members, free_flow, parameterization: traffic
                - gains, noise: sinr

        Returns:
            Cost family instance

        Raises:
            ValueError: If the tag is not supported
        """
        tag = tag.lower()

        if tag == "quadratic":
            return QuadraticFamily(
                np.asarray(kwargs["Q_basis"], dtype=float),
                np.asarray(kwargs["B_basis"], dtype=float),
                np.asarray(kwargs["c_basis"], dtype=float),
                kwargs.get("offset_basis"),
            )

        elif tag == "traffic":
            return TrafficFamily(
                n_arcs=kwargs["n_arcs"],
                n_members=kwargs["n_members"],
                free_flow=kwargs["free_flow"],
                parameterization=kwargs.get("parameterization", "scalar"),
            )

        elif tag == "sinr":
            return SinrFamily(kwargs["gains"], kwargs["noise"])

        elif tag == "lqr":
            raise ValueError("LQR families are built from an LqrSpec with core.lqr.build_lqr_reduction")

        else:
            raise ValueError(f"Unsupported family: {tag}. Supported families: quadratic, traffic, sinr")

    @staticmethod
    def get_available_families() -> dict:
        return {
            "quadratic": {
                "class": "QuadraticFamily",
                "description": "Linear-quadratic costs with basis-expanded Q, B and c",
                "required_params": ["Q_basis", "B_basis", "c_basis"],
            },
            "traffic": {
                "class": "TrafficFamily",
                "description": "Congestion costs over network arcs",
                "required_params": ["n_arcs", "n_members", "free_flow"],
            },
            "sinr": {
                "class": "SinrFamily",
                "description": "Power control with signal-to-interference costs",
                "required_params": ["gains", "noise"],
            },
        }
