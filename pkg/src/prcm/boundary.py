"""Cluster terms for every boundary condition, through one code path.

For a percolation complex P of the box r and a fixed set E of exterior
(or wired) i-cells inside a truncation region R, the cluster term is the
size of the image of H_{i-1}(P; Z_q) in H_{i-1}(P + E + skeleton(R); Z_q):

    |im| = |Z_{i-1}(r)| / |B_{i-1}(P + E) restricted to r|

The numerator only depends on the box. The denominator is read off a Howell
form of the boundary generators with coordinates outside r ordered first:
rows pivoting inside r span exactly the boundaries supported in r.

Free:              R = r, E empty (gives |H^{i-1}(P; Z_q)|)
Wired:             R = r, E = i-cells of the box boundary (P union the shell)
Plaquettes(S):     R = box grown by n, E = S within R
WiredAtInfinity(T): R = box grown by n, E = exterior cells of R not in T
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .chains import boundary_matrix
from .config import context_cap
from .context import Context
from .errors import EnumerationLimitError, StabilizationError
from .lattice import (
    boundary_shell,
    cell_boundary,
    enumerate_cells,
    expand_box,
    support_radius,
)
from .types import BoundaryKind, Configuration
from .zq_linalg import howell_form, kernel_mod

logger = logging.getLogger(__name__)

DEFAULT_RADIUS_CAP = 6


def default_radius(ctx: Context) -> int:
    """Truncation radius used when the context does not fix one."""
    if ctx.truncation_radius is not None:
        return ctx.truncation_radius
    return support_based_radius(ctx)


def support_based_radius(ctx: Context) -> int:
    """Plaquettes(S) needs every cell of S inside the region; WiredAtInfinity(T)
    needs one more layer so the wired shell lies outside T.
    """
    kind = ctx.boundary.kind
    if kind == BoundaryKind.PLAQUETTES:
        return support_radius(ctx.box, ctx.boundary.cells)
    if kind == BoundaryKind.WIRED_AT_INFINITY:
        return support_radius(ctx.box, ctx.boundary.cells) + 1
    return 0


class ClusterTerm:
    """Callable P -> |im phi_*| for one context, cached per configuration."""

    def __init__(self, ctx: Context, radius: Optional[int] = None):
        self.ctx = ctx
        self.q = ctx.q
        kind = ctx.boundary.kind
        truncated = ctx.boundary.is_truncated
        self.radius = (radius if radius is not None else default_radius(ctx)) if truncated else 0
        i = ctx.i
        region = expand_box(ctx.box, self.radius) if truncated else ctx.box

        inner = ctx.skeleton.index(i - 1)
        region_faces = enumerate_cells(region, i - 1) if truncated else list(inner)
        outside = [c for c in region_faces if c not in inner]
        self.n_outside = len(outside)
        order = outside + list(inner)
        self._position = {c: k for k, c in enumerate(order)}
        self.n_coords = len(order)

        if kind == BoundaryKind.FREE:
            fixed = []
        elif kind == BoundaryKind.WIRED:
            fixed = boundary_shell(ctx.box, i)
        else:
            exterior = [c for c in enumerate_cells(region, i) if c not in ctx.plaquettes]
            if kind == BoundaryKind.PLAQUETTES:
                fixed = [c for c in exterior if c in ctx.boundary.cells]
            else:
                fixed = [c for c in exterior if c not in ctx.boundary.cells]
        self.fixed_cells = tuple(fixed)

        self._plaquette_rows = self._rows(ctx.plaquettes.cells)
        fixed_rows = self._rows(self.fixed_cells)
        self._fixed = howell_form(fixed_rows, self.q).rows if self.q > 1 else fixed_rows[:0]
        self.cycle_count = kernel_mod(boundary_matrix(ctx.skeleton, i - 1), self.q).kernel_size
        self._cache: Dict[int, int] = {}
        logger.debug(
            f"ClusterTerm kind={kind.value} radius={self.radius} "
            f"coords={self.n_coords} fixed={len(self.fixed_cells)}"
        )

    def _rows(self, cells) -> np.ndarray:
        rows = np.zeros((len(cells), self.n_coords), dtype=np.int64)
        for k, cell in enumerate(cells):
            for face, sign in cell_boundary(cell).items():
                rows[k, self._position[face]] = sign % self.q
        return rows

    def __call__(self, P: Configuration) -> int:
        if self.q == 1:
            return 1
        cached = self._cache.get(P.mask)
        if cached is not None:
            return cached
        open_rows = self._plaquette_rows[list(P.open_indices())]
        generators = np.vstack([self._fixed, open_rows])
        inside = howell_form(generators, self.q).span_size(from_col=self.n_outside)
        value = self.cycle_count // inside
        self._cache[P.mask] = value
        return value

    def table(self) -> Tuple[int, ...]:
        """Cluster terms of every configuration, indexed by mask."""
        n = self.ctx.n_plaquettes
        return tuple(self(Configuration(m, n)) for m in range(1 << n))


# ============================================================
# Stabilization
# ============================================================

@dataclass(frozen=True)
class StabilizationCertificate:
    """Cluster tables at radii n and n + 1 agree up to one common factor."""
    radius: int
    table: Tuple[int, ...]
    next_table: Tuple[int, ...]
    radii_tested: Tuple[int, ...]


def _proportional(a: Tuple[int, ...], b: Tuple[int, ...]) -> bool:
    return all(x * b[0] == y * a[0] for x, y in zip(a, b))


def stabilize_truncation(
    ctx: Context,
    max_radius: int = DEFAULT_RADIUS_CAP,
    enumeration_cap: Optional[int] = None,
) -> StabilizationCertificate:
    """Find a truncation radius n whose measure equals the one at n + 1.

    Radii are tried from the support radius of the boundary cells upward,
    doubling the step each time; the first n whose full cluster table is
    proportional to the table at n + 1 is certified.

    Raises:
        EnumerationLimitError: If the context is too large to tabulate
        StabilizationError: If no radius up to ``max_radius`` stabilizes
    """
    if enumeration_cap is None:
        enumeration_cap = context_cap(ctx)
    if ctx.n_plaquettes > enumeration_cap:
        raise EnumerationLimitError(ctx.n_plaquettes, enumeration_cap)
    tables: Dict[int, Tuple[int, ...]] = {}

    def table(n: int) -> Tuple[int, ...]:
        if n not in tables:
            tables[n] = ClusterTerm(ctx, radius=n).table()
        return tables[n]

    tested: List[int] = []
    start = support_based_radius(ctx)
    n = start
    while n <= max_radius:
        tested.append(n)
        stable = _proportional(table(n), table(n + 1))
        logger.debug(f"Truncation radius {n} vs {n + 1}: stable={stable}")
        if stable:
            return StabilizationCertificate(n, table(n), table(n + 1), tuple(tested))
        n = start + 2 * (n - start) if n > start else start + 1
    raise StabilizationError(
        f"No stable truncation radius up to {max_radius} for {ctx.boundary.kind.value} "
        f"boundary with {len(ctx.boundary.cells)} cells"
    )
