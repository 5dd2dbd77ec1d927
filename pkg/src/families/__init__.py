"""
Parameterized team/game cost families.

Usage:
    from families import FamilyFactory
    family = FamilyFactory.get_family("sinr", gains=[1.0, 0.8], noise=0.1)
"""

from .base_family import CostFamily
from .quadratic_family import QuadraticFamily, TrafficFamily, LqrReducedFamily
from .sinr_family import SinrFamily
from .family_factory import FamilyFactory

__all__ = [
    'CostFamily',
    'QuadraticFamily',
    'TrafficFamily',
    'LqrReducedFamily',
    'SinrFamily',
    'FamilyFactory',
]
