"""PRCM pytest configuration."""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add src to Python path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from prcm.context import Context  # noqa: E402
from prcm.types import BoundaryCondition, Box, Convention  # noqa: E402


def make_context(lo, hi, i=1, q=2, p=Fraction(1, 2), convention=Convention.OPEN, boundary=None):
    """Context on the primal box [lo, hi] (undoubled corners)."""
    return Context(
        box=Box.from_primal(lo, hi, convention),
        i=i,
        q=q,
        p=p,
        boundary=boundary or BoundaryCondition.free(),
    )


@pytest.fixture
def single_edge():
    """d=1 box [0, 1]: one plaquette (an edge) between two vertices."""
    return make_context((0,), (1,))


@pytest.fixture
def square_open():
    """d=2, i=1, open [0, 2]^2: the four edges through the center vertex."""
    return make_context((0, 0), (2, 2))


@pytest.fixture
def square_closed():
    """d=2, i=1, closed [0, 2]^2: all twelve edges."""
    return make_context((0, 0), (2, 2), convention=Convention.CLOSED)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    """Keep PRCM_* settings from the caller's shell out of the tests."""
    for name in ("PRCM_WORKERS", "PRCM_ENUMERATION_CAP", "PRCM_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def context_factory():
    """Builder for contexts on primal boxes."""
    return make_context
