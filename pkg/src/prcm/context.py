"""Finite-volume model contexts.

A Context fixes everything a finite-volume PRCM needs:
- The box (doubled coordinates) and its open/closed convention
- The plaquette dimension i and ambient dimension d
- Parameters q (coefficient modulus) and p (exact rational)
- The boundary condition and an optional truncation radius
- An optional enumeration cap overriding PRCM_ENUMERATION_CAP

Contexts are immutable and hashable, so derived data (cell indices,
skeletons, cluster terms) is cached per context.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Tuple, Union

from .errors import InvalidContextError
from .lattice import (
    CellComplex,
    CellIndex,
    box_complex,
    dual_box,
    dual_cell,
    format_cell,
)
from .types import BoundaryCondition, BoundaryKind, Box, Cell, Configuration

Rational = Union[Fraction, int, str, float]


def parse_rational(value: Rational) -> Fraction:
    """Exact rational from a Fraction, int, ``"a/b"`` or decimal string.

    Floats go through their shortest decimal repr, so 0.1 means 1/10.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidContextError(f"Not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidContextError(f"Not a rational number: {value!r}") from None


def dual_parameter(p: Fraction, q: int) -> Fraction:
    """p* = (1 - p) q / ((1 - p) q + p)."""
    return (1 - p) * q / ((1 - p) * q + p)


@dataclass(frozen=True)
class Context:
    """Box, dimension, parameters and boundary condition of one PRCM."""
    box: Box
    i: int
    q: int
    p: Fraction
    boundary: BoundaryCondition = field(default_factory=BoundaryCondition.free)
    truncation_radius: Optional[int] = None
    enumeration_cap: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "p", parse_rational(self.p))
        d = self.box.d
        if not 1 <= self.i <= d:
            raise InvalidContextError(f"Plaquette dimension i={self.i} outside [1, {d}]")
        if self.q < 1:
            raise InvalidContextError(f"q must be a positive integer, got {self.q}")
        if not 0 <= self.p <= 1:
            raise InvalidContextError(f"p must lie in [0, 1], got {self.p}")
        if self.truncation_radius is not None and self.truncation_radius < 0:
            raise InvalidContextError(f"Negative truncation radius {self.truncation_radius}")
        if self.enumeration_cap is not None and self.enumeration_cap < 0:
            raise InvalidContextError(f"Negative enumeration cap {self.enumeration_cap}")
        for cell in self.boundary.cells:
            if cell.d != d or cell.dim != self.i or cell.is_primal != self.box.is_primal:
                raise InvalidContextError(
                    f"Boundary cell {format_cell(cell)} is not an {self.i}-cell of this lattice"
                )
            if cell in self.plaquettes:
                raise InvalidContextError(
                    f"Boundary cell {format_cell(cell)} is a plaquette of the context"
                )

    @property
    def d(self) -> int:
        return self.box.d

    @cached_property
    def full_complex(self) -> CellComplex:
        """The skeleton plus every plaquette: the complex of the all-open configuration."""
        return box_complex(self.box, self.i)

    @cached_property
    def plaquettes(self) -> CellIndex:
        """The i-cells carrying configuration bits, in enumeration order."""
        return self.full_complex.index(self.i)

    @cached_property
    def skeleton(self) -> CellComplex:
        """All cells of dimension < i in the closed box."""
        return CellComplex({k: self.full_complex.cells(k) for k in range(self.i)})

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaquettes)

    def percolation_complex(self, P: Configuration) -> CellComplex:
        """Full (i-1)-skeleton of the box plus the open plaquettes of P."""
        return self.skeleton.with_cells(self.cells_of(P))

    def cells_of(self, P: Configuration) -> Tuple[Cell, ...]:
        self.check_configuration(P)
        return tuple(self.plaquettes.cell_of(k) for k in P.open_indices())

    def configuration(self, open_cells: Iterable[Cell]) -> Configuration:
        return Configuration.from_indices(
            (self.plaquettes.id_of(c) for c in open_cells), self.n_plaquettes
        )

    def replace(self, **changes) -> "Context":
        return replace(self, **changes)

    def check_configuration(self, P: Configuration) -> None:
        if P.size != self.n_plaquettes:
            raise InvalidContextError(
                f"Configuration has {P.size} bits, context has {self.n_plaquettes} plaquettes"
            )


def dual_boundary(boundary: BoundaryCondition) -> BoundaryCondition:
    """Free <-> Wired; Plaquettes(S) <-> WiredAtInfinity(duals of S).

    The dual opens exactly the duals of the closed exterior cells, so the
    finitely many open cells of S become finitely many closed dual cells.
    """
    kind = boundary.kind
    if kind == BoundaryKind.FREE:
        return BoundaryCondition.wired()
    if kind == BoundaryKind.WIRED:
        return BoundaryCondition.free()
    duals = frozenset(dual_cell(c) for c in boundary.cells)
    if kind == BoundaryKind.PLAQUETTES:
        return BoundaryCondition.wired_at_infinity(duals)
    return BoundaryCondition.plaquettes(duals)


def dual_context(ctx: Context) -> Context:
    """The (d - i)-dimensional context on the dual box at p*.

    Raises:
        InvalidContextError: If i = d (no dual plaquettes)
    """
    if ctx.i >= ctx.d:
        raise InvalidContextError(f"Duality needs 1 <= i <= d - 1, got i={ctx.i}, d={ctx.d}")
    return Context(
        box=dual_box(ctx.box),
        i=ctx.d - ctx.i,
        q=ctx.q,
        p=dual_parameter(ctx.p, ctx.q),
        boundary=dual_boundary(ctx.boundary),
        enumeration_cap=ctx.enumeration_cap,
    )
