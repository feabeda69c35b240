"""Cubical-complex geometry on Z^d and its dual lattice.

Provides:
- Cell enumeration inside boxes under the open/closed conventions
- Signed cubical boundary (standard alternating-sign orientation)
- Dual cells, dual boxes and dual configurations
- Dense per-dimension cell indices and cell complexes
- The ``anchor=(...);dirs={...}`` text format used by config files
"""

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from .errors import InvalidCellError, InvalidDimensionError
from .types import Box, Cell, Configuration, Convention


# ============================================================
# Enumeration
# ============================================================

def enumerate_cells(box: Box, k: int, i: Optional[int] = None) -> List[Cell]:
    """List the k-cells of a box in lexicographic (anchor, dirs) order.

    Cells of dimension below ``i`` (or every dimension when ``i`` is None)
    are all cells contained in the closed box. For ``k == i`` the box
    convention applies: OPEN keeps only cells meeting the interior.

    Raises:
        InvalidDimensionError: If k is negative or exceeds d
    """
    d = box.d
    if k < 0 or k > d:
        raise InvalidDimensionError(f"Cell dimension {k} outside [0, {d}]")
    interior_only = i is not None and k == i and box.convention == Convention.OPEN
    cells = []
    for dirs in itertools.combinations(range(d), k):
        ranges = []
        for axis in range(d):
            lo, hi = box.lo[axis], box.hi[axis]
            if axis in dirs:
                ranges.append(range(lo, hi - 1, 2))
            elif interior_only:
                ranges.append(range(lo + 2, hi - 1, 2))
            else:
                ranges.append(range(lo, hi + 1, 2))
        for anchor in itertools.product(*ranges):
            cells.append(Cell(anchor, dirs))
    cells.sort()
    return cells


def boundary_shell(box: Box, k: int) -> List[Cell]:
    """k-cells of the closed box lying in its topological boundary."""
    shell = []
    for cell in enumerate_cells(box, k):
        for axis in range(box.d):
            if axis in cell.dirs:
                continue
            a = cell.anchor[axis]
            if a == box.lo[axis] or a == box.hi[axis]:
                shell.append(cell)
                break
    return shell


def expand_box(box: Box, n: int) -> Box:
    """Closed box grown by n primal units on every side."""
    return Box(
        tuple(v - 2 * n for v in box.lo),
        tuple(v + 2 * n for v in box.hi),
        Convention.CLOSED,
    )


def support_radius(box: Box, cells: Iterable[Cell]) -> int:
    """Smallest n such that ``expand_box(box, n)`` contains every cell."""
    radius = 0
    for cell in cells:
        for axis in range(box.d):
            a, b = cell.extent(axis)
            radius = max(radius, -(-(box.lo[axis] - a) // 2), -(-(b - box.hi[axis]) // 2))
    return radius


# ============================================================
# Boundary and duality
# ============================================================

def cell_boundary(cell: Cell) -> Dict[Cell, int]:
    """Signed faces: sum over t of (-1)^t (front_t - back_t).

    The t-th direction j contributes the face at a_j + 2 with sign (-1)^t
    and the face at a_j with the opposite sign. Vertices have empty boundary.
    """
    faces: Dict[Cell, int] = {}
    for t, axis in enumerate(cell.dirs):
        rest = cell.dirs[:t] + cell.dirs[t + 1:]
        sign = -1 if t % 2 else 1
        front = list(cell.anchor)
        front[axis] += 2
        faces[Cell(tuple(front), rest)] = sign
        faces[Cell(cell.anchor, rest)] = -sign
    return faces


def chain_boundary(chain: Mapping[Cell, int]) -> Dict[Cell, int]:
    """Boundary of a signed chain over Z, zero terms dropped."""
    out: Dict[Cell, int] = {}
    for cell, coef in chain.items():
        for face, sign in cell_boundary(cell).items():
            out[face] = out.get(face, 0) + coef * sign
    return {c: v for c, v in out.items() if v}


def dual_cell(cell: Cell) -> Cell:
    """The complementary-dimension cell of the other lattice with the same center."""
    center = cell.center
    dirs = tuple(axis for axis in range(cell.d) if axis not in cell.dirs)
    anchor = tuple(c - 1 if axis in dirs else c for axis, c in enumerate(center))
    return Cell(anchor, dirs)


def dual_box(box: Box) -> Box:
    """Dual box with swapped convention.

    OPEN [lo, hi] pairs with the CLOSED dual box [lo + 1/2, hi - 1/2];
    CLOSED [lo, hi] pairs with the OPEN dual box [lo - 1/2, hi + 1/2].
    """
    if box.convention == Convention.OPEN:
        if any(b - a < 2 for a, b in zip(box.lo, box.hi)):
            raise InvalidCellError(f"Open box {box.lo}..{box.hi} is too thin to have a dual")
        return Box(
            tuple(v + 1 for v in box.lo),
            tuple(v - 1 for v in box.hi),
            Convention.CLOSED,
        )
    return Box(
        tuple(v - 1 for v in box.lo),
        tuple(v + 1 for v in box.hi),
        Convention.OPEN,
    )


@lru_cache(maxsize=128)
def _dual_positions(box: Box, i: int) -> Tuple[Tuple[int, ...], int]:
    plaquettes = enumerate_cells(box, i, i)
    dbox = dual_box(box)
    dual_index = CellIndex.from_cells(enumerate_cells(dbox, box.d - i, box.d - i))
    positions = tuple(dual_index.id_of(dual_cell(c)) for c in plaquettes)
    return positions, len(dual_index)


def dual_configuration(P: Configuration, ctx) -> Configuration:
    """Open exactly the duals of the closed plaquettes of P on the dual box.

    ``ctx`` needs ``box`` and ``i``; the result indexes the (d - i)-cells of
    ``dual_box(ctx.box)`` in their enumeration order.
    """
    positions, size = _dual_positions(ctx.box, ctx.i)
    mask = 0
    for k, pos in enumerate(positions):
        if not P.mask >> k & 1:
            mask |= 1 << pos
    return Configuration(mask, size)


# ============================================================
# Indices and complexes
# ============================================================

@dataclass(frozen=True)
class CellIndex:
    """Dense ids for the cells of one dimension, in sorted order."""
    cells: Tuple[Cell, ...] = ()
    _ids: Dict[Cell, int] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_cells(cls, cells: Iterable[Cell]) -> "CellIndex":
        ordered = tuple(sorted(set(cells)))
        return cls(ordered, {c: k for k, c in enumerate(ordered)})

    def id_of(self, cell: Cell) -> int:
        try:
            return self._ids[cell]
        except KeyError:
            raise InvalidCellError(f"Cell {format_cell(cell)} not in index") from None

    def cell_of(self, k: int) -> Cell:
        return self.cells[k]

    def __contains__(self, cell: object) -> bool:
        return cell in self._ids

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells)

    def __hash__(self) -> int:
        return hash(self.cells)


class CellComplex:
    """Finite cubical complex stored as one CellIndex per dimension."""

    def __init__(self, cells_by_dim: Mapping[int, Iterable[Cell]]):
        self._indices: Dict[int, CellIndex] = {
            k: CellIndex.from_cells(cells) for k, cells in cells_by_dim.items()
        }

    @property
    def dimension(self) -> int:
        dims = [k for k, idx in self._indices.items() if len(idx)]
        return max(dims) if dims else -1

    def index(self, k: int) -> CellIndex:
        return self._indices.get(k, CellIndex())

    def cells(self, k: int) -> Tuple[Cell, ...]:
        return self.index(k).cells

    def union(self, other: "CellComplex") -> "CellComplex":
        dims = set(self._indices) | set(other._indices)
        return CellComplex({k: self.cells(k) + other.cells(k) for k in dims})

    def with_cells(self, cells: Iterable[Cell]) -> "CellComplex":
        extra: Dict[int, List[Cell]] = {}
        for c in cells:
            extra.setdefault(c.dim, []).append(c)
        return self.union(CellComplex(extra))

    def __contains__(self, cell: object) -> bool:
        return isinstance(cell, Cell) and cell in self.index(cell.dim)

    def __repr__(self) -> str:
        sizes = {k: len(idx) for k, idx in sorted(self._indices.items())}
        return f"CellComplex({sizes})"


def box_complex(box: Box, i: int) -> CellComplex:
    """All cells of dimension < i in the closed box plus the box's i-cells."""
    return CellComplex({k: enumerate_cells(box, k, i) for k in range(i + 1)})


# ============================================================
# Text format
# ============================================================

_CELL_RE = re.compile(r"^\s*anchor=\(([^)]*)\)\s*;\s*dirs=\{([^}]*)\}\s*$")
_TERM_RE = re.compile(r"^\s*([+-]?\d+)\s+(anchor=.*)$")


def format_cell(cell: Cell) -> str:
    anchor = ",".join(str(a) for a in cell.anchor)
    dirs = ",".join(str(j + 1) for j in cell.dirs)
    return f"anchor=({anchor});dirs={{{dirs}}}"


def parse_cell(text: str) -> Cell:
    """Parse ``anchor=(a1,...,ad);dirs={j1,...}`` with 1-based directions."""
    match = _CELL_RE.match(text)
    if not match:
        raise InvalidCellError(f"Malformed cell text: {text!r}")
    try:
        anchor = tuple(int(v) for v in match.group(1).split(","))
        dirs_text = match.group(2).strip()
        dirs = tuple(int(v) - 1 for v in dirs_text.split(",")) if dirs_text else ()
    except ValueError:
        raise InvalidCellError(f"Malformed cell text: {text!r}") from None
    return Cell(anchor, dirs)


def parse_chain(text: str) -> Dict[Cell, int]:
    """Parse a signed chain: one ``<coef> <cell>`` term per line or per ``|``.

    A bare cell counts with coefficient +1; repeated cells are summed.
    """
    chain: Dict[Cell, int] = {}
    for raw in re.split(r"[\n|]", text):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _TERM_RE.match(line)
        coef, cell_text = (int(match.group(1)), match.group(2)) if match else (1, line)
        cell = parse_cell(cell_text)
        chain[cell] = chain.get(cell, 0) + coef
    return {c: v for c, v in chain.items() if v}


def format_chain(chain: Mapping[Cell, int]) -> str:
    return "\n".join(f"{coef:+d} {format_cell(c)}" for c, coef in sorted(chain.items()))


def parse_cells(lines: Iterable[str]) -> List[Cell]:
    cells = []
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if line:
            cells.append(parse_cell(line))
    return cells


def read_cell_file(path: str) -> List[Cell]:
    """Read a boundary-condition file: one cell per line, ``#`` comments."""
    return parse_cells(Path(path).read_text().splitlines())


def read_chain_file(path: str) -> Dict[Cell, int]:
    return parse_chain(Path(path).read_text())
