"""Core value types for cubical complexes and plaquette configurations.

Coordinates are DOUBLED: a primal lattice point x of Z^d is stored as 2x,
so the dual lattice Z^d + (1/2, ..., 1/2) lives on odd tuples and every
cell of either lattice has exact integer anchors.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, Sequence, Tuple

from .errors import InvalidCellError, InvalidContextError


class Convention(str, Enum):
    """Which top-dimensional cells a box contributes."""
    OPEN = "open"        # i-cells meeting the interior of the box
    CLOSED = "closed"    # every i-cell contained in the box

    def swapped(self) -> "Convention":
        return Convention.CLOSED if self is Convention.OPEN else Convention.OPEN


class BoundaryKind(str, Enum):
    """Boundary condition families."""
    FREE = "free"
    WIRED = "wired"
    PLAQUETTES = "plaquettes"                # listed exterior cells open, rest closed
    WIRED_AT_INFINITY = "wired_at_infinity"  # listed exterior cells closed, rest open


def _uniform_parity(values: Sequence[int]) -> bool:
    return len({v % 2 for v in values}) <= 1


@dataclass(frozen=True, order=True)
class Cell:
    """A unit cube of Z^d or of its dual lattice.

    ``dirs`` holds 0-based axes; the cell occupies [a_k, a_k + 2] along each
    axis in ``dirs`` and the single coordinate a_k elsewhere.
    """
    anchor: Tuple[int, ...]
    dirs: Tuple[int, ...] = ()

    def __post_init__(self):
        anchor = tuple(int(a) for a in self.anchor)
        dirs = tuple(sorted(int(j) for j in self.dirs))
        if not anchor:
            raise InvalidCellError("Cell anchor must have at least one coordinate")
        if not _uniform_parity(anchor):
            raise InvalidCellError(f"Mixed parity anchor {anchor}")
        if len(set(dirs)) != len(dirs):
            raise InvalidCellError(f"Duplicate directions in {dirs}")
        if dirs and (dirs[0] < 0 or dirs[-1] >= len(anchor)):
            raise InvalidCellError(f"Directions {dirs} out of range for d={len(anchor)}")
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "dirs", dirs)

    @property
    def d(self) -> int:
        return len(self.anchor)

    @property
    def dim(self) -> int:
        return len(self.dirs)

    @property
    def is_primal(self) -> bool:
        return self.anchor[0] % 2 == 0

    @property
    def center(self) -> Tuple[int, ...]:
        """Doubled center: anchor shifted by one along each direction."""
        return tuple(a + (1 if k in self.dirs else 0) for k, a in enumerate(self.anchor))

    def extent(self, axis: int) -> Tuple[int, int]:
        a = self.anchor[axis]
        return (a, a + 2) if axis in self.dirs else (a, a)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in doubled coordinates with a top-cell convention."""
    lo: Tuple[int, ...]
    hi: Tuple[int, ...]
    convention: Convention = Convention.OPEN

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise InvalidCellError(f"Box corners {lo} and {hi} differ in dimension")
        if any(a > b for a, b in zip(lo, hi)):
            raise InvalidCellError(f"Empty box: lo={lo} hi={hi}")
        if not _uniform_parity(lo + hi):
            raise InvalidCellError(f"Box corners must share one lattice parity: {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "convention", Convention(self.convention))

    @classmethod
    def from_primal(
        cls,
        lo: Sequence[int],
        hi: Sequence[int],
        convention: Convention = Convention.OPEN,
    ) -> "Box":
        """Build a box of Z^d from primal (undoubled) integer corners."""
        return cls(tuple(2 * v for v in lo), tuple(2 * v for v in hi), convention)

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def is_primal(self) -> bool:
        return self.lo[0] % 2 == 0

    def with_convention(self, convention: Convention) -> "Box":
        return Box(self.lo, self.hi, convention)

    def contains_cell(self, cell: Cell) -> bool:
        """Closed containment of the cell in the box."""
        if cell.d != self.d:
            return False
        for axis in range(self.d):
            a, b = cell.extent(axis)
            if a < self.lo[axis] or b > self.hi[axis]:
                return False
        return True

    def contains_box(self, other: "Box") -> bool:
        return all(a <= b for a, b in zip(self.lo, other.lo)) and all(
            a >= b for a, b in zip(self.hi, other.hi)
        )


@dataclass(frozen=True)
class Configuration:
    """Open/closed states of the plaquettes of a context, as a bit mask.

    Bit k is set when plaquette k (in the context's cell order) is open.
    """
    mask: int
    size: int

    def __post_init__(self):
        if self.size < 0:
            raise ValueError(f"Configuration size must be nonnegative, got {self.size}")
        if self.mask < 0 or self.mask >> self.size:
            raise ValueError(f"Mask {self.mask} does not fit {self.size} plaquettes")

    @classmethod
    def empty(cls, size: int) -> "Configuration":
        return cls(0, size)

    @classmethod
    def full(cls, size: int) -> "Configuration":
        return cls((1 << size) - 1, size)

    @classmethod
    def from_indices(cls, indices: Iterable[int], size: int) -> "Configuration":
        mask = 0
        for k in indices:
            mask |= 1 << int(k)
        return cls(mask, size)

    def is_open(self, k: int) -> bool:
        return bool(self.mask >> k & 1)

    def open_indices(self) -> Tuple[int, ...]:
        return tuple(k for k in range(self.size) if self.mask >> k & 1)

    def closed_indices(self) -> Tuple[int, ...]:
        return tuple(k for k in range(self.size) if not self.mask >> k & 1)

    def count(self) -> int:
        return bin(self.mask).count("1")

    def with_open(self, k: int) -> "Configuration":
        return Configuration(self.mask | 1 << k, self.size)

    def with_closed(self, k: int) -> "Configuration":
        return Configuration(self.mask & ~(1 << k), self.size)

    def complement(self) -> "Configuration":
        return Configuration(((1 << self.size) - 1) ^ self.mask, self.size)

    def union(self, other: "Configuration") -> "Configuration":
        return Configuration(self.mask | other.mask, self.size)

    def intersection(self, other: "Configuration") -> "Configuration":
        return Configuration(self.mask & other.mask, self.size)

    def issubset(self, other: "Configuration") -> bool:
        return self.mask & ~other.mask == 0


@dataclass(frozen=True)
class BoundaryCondition:
    """Exterior plaquette states seen by a finite-volume measure.

    PLAQUETTES lists the open exterior cells (all others closed);
    WIRED_AT_INFINITY lists the closed exterior cells (all others open).
    """
    kind: BoundaryKind = BoundaryKind.FREE
    cells: FrozenSet[Cell] = field(default_factory=frozenset)

    def __post_init__(self):
        kind = BoundaryKind(self.kind)
        cells = frozenset(self.cells)
        if kind in (BoundaryKind.FREE, BoundaryKind.WIRED) and cells:
            raise InvalidContextError(f"{kind.value} boundary takes no cells")
        if len({c.dim for c in cells}) > 1:
            raise InvalidContextError("Boundary cells must share one dimension")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def free(cls) -> "BoundaryCondition":
        return cls(BoundaryKind.FREE)

    @classmethod
    def wired(cls) -> "BoundaryCondition":
        return cls(BoundaryKind.WIRED)

    @classmethod
    def plaquettes(cls, cells: Iterable[Cell]) -> "BoundaryCondition":
        return cls(BoundaryKind.PLAQUETTES, frozenset(cells))

    @classmethod
    def wired_at_infinity(cls, cells: Iterable[Cell] = ()) -> "BoundaryCondition":
        return cls(BoundaryKind.WIRED_AT_INFINITY, frozenset(cells))

    @property
    def is_truncated(self) -> bool:
        return self.kind in (BoundaryKind.PLAQUETTES, BoundaryKind.WIRED_AT_INFINITY)
