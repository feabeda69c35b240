"""Interchangeable homology routes."""

from .howell import HowellRoute
from .smith import SmithRoute
from .cochain import CochainRoute

__all__ = [
    "HowellRoute",
    "SmithRoute",
    "CochainRoute",
]
