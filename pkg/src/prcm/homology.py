"""Homology and cohomology of percolation complexes.

All group sizes use unreduced (co)homology. For i = 1 this makes the free
cluster term q^{#components}; reduced/unreduced differences are P-independent
factors and drop out after normalization.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .boundary import ClusterTerm
from .chains import ChainSlice, HomologyRoute, boundary_matrix, chain_slice
from .context import Context, dual_context
from .errors import InvalidComplexError, InvalidContextError, VerificationError
from .lattice import CellComplex, boundary_shell, dual_configuration, format_cell
from .report import VerificationReport
from .routes import CochainRoute, HowellRoute, SmithRoute
from .types import BoundaryCondition, Cell, Configuration
from .zq_linalg import howell_form, kernel_mod

logger = logging.getLogger(__name__)

__all__ = [
    "HomologySummary",
    "InducedMapSummary",
    "EulerPoincareResult",
    "boundary_matrix",
    "chain_slice",
    "homology_size_mod_q",
    "cohomology_size_mod_q",
    "integral_homology",
    "induced_image_size",
    "wired_size",
    "boundary_class_order",
    "euler_poincare_constant",
]


@dataclass(frozen=True)
class HomologySummary:
    """Integral homology in one degree, with its size over Z_q when requested."""
    k: int
    betti: int
    torsion: Tuple[int, ...]
    lower_torsion: Tuple[int, ...]
    size_mod_q: Optional[int] = None


@dataclass(frozen=True)
class InducedMapSummary:
    """Inclusion-induced map H_k(P; Z_q) -> H_k(P + extra; Z_q)."""
    image_size: int
    kernel_size: int
    source_size: int


@dataclass(frozen=True)
class EulerPoincareResult:
    """The configuration-independent exponent c and how many configurations agreed."""
    c: int
    checked: int


def homology_size_mod_q(
    complex_: CellComplex,
    k: int,
    q: int,
    route: Optional[HomologyRoute] = None,
) -> int:
    """|H_k(X; Z_q)| through the given route (Howell by default)."""
    return (route or HowellRoute()).size_mod_q(chain_slice(complex_, k), q)


def cohomology_size_mod_q(complex_: CellComplex, k: int, q: int) -> int:
    """|H^k(X; Z_q)| from coboundary matrices."""
    return CochainRoute().size_mod_q(chain_slice(complex_, k), q)


def integral_homology(
    source: Union[CellComplex, ChainSlice],
    k: Optional[int] = None,
    q: Optional[int] = None,
) -> HomologySummary:
    """Betti number and torsion of H_k(X; Z) via Smith normal form.

    ``source`` is a complex (``k`` required) or a prebuilt chain slice, which
    allows synthetic slices with torsion.
    """
    if isinstance(source, ChainSlice):
        slice_ = source
    else:
        if k is None:
            raise ValueError("Degree k is required for a cell complex")
        slice_ = chain_slice(source, k)
    route = SmithRoute()
    betti, torsion, lower_torsion = route.integral(slice_)
    size = route.size_mod_q(slice_, q) if q is not None else None
    return HomologySummary(slice_.k, betti, torsion, lower_torsion, size)


def _boundaries_inside(
    larger: CellComplex,
    inner: Sequence[Cell],
    k: int,
    q: int,
) -> int:
    """|B_k(larger) intersected with the chains on ``inner``| over Z_q."""
    inner_set = set(inner)
    outside = [c for c in larger.cells(k) if c not in inner_set]
    order = outside + list(inner)
    position = {c: n for n, c in enumerate(order)}
    d_up = boundary_matrix(larger, k + 1)
    rows = np.zeros((d_up.cols, len(order)), dtype=np.int64)
    faces = larger.index(k)
    for r, c, v in d_up.entries:
        rows[c, position[faces.cell_of(r)]] = v % q
    return howell_form(rows, q).span_size(from_col=len(outside))


def induced_image_size(
    P: CellComplex,
    extra: Union[CellComplex, Iterable[Cell]],
    k: int,
    q: int,
) -> InducedMapSummary:
    """Image and kernel sizes of H_k(P; Z_q) -> H_k(P + extra; Z_q).

    |im| = |Z_k(P)| / |B_k(P + extra) within C_k(P)|, computed by Howell
    forms modulo q.
    """
    larger = P.union(extra) if isinstance(extra, CellComplex) else P.with_cells(extra)
    cycles = kernel_mod(boundary_matrix(P, k), q).kernel_size
    bounding = _boundaries_inside(larger, P.cells(k), k, q)
    image = cycles // bounding
    source = homology_size_mod_q(P, k, q)
    return InducedMapSummary(image_size=image, kernel_size=source // image, source_size=source)


def wired_size(P: CellComplex, box, i: int, q: int) -> int:
    """|H^{i-1}(P + boundary shell; Z_q)|, the shell taken in dimensions <= i."""
    shell = [c for k in range(i + 1) for c in boundary_shell(box, k)]
    return cohomology_size_mod_q(P.with_cells(shell), i - 1, q)


def boundary_class_order(P: CellComplex, sigma: Cell, q: int) -> int:
    """Order of the class of the boundary of sigma in H_{i-1}(P; Z_q).

    Computed as |H_{i-1}(P)| / |H_{i-1}(P + sigma)|.

    Raises:
        InvalidComplexError: If sigma is already in P or a face is missing
    """
    if sigma in P:
        raise InvalidComplexError(f"{format_cell(sigma)} is already in the complex")
    k = sigma.dim - 1
    before = homology_size_mod_q(P, k, q)
    after = homology_size_mod_q(P.with_cells([sigma]), k, q)
    return before // after


def _exact_log(ratio: Fraction, q: int) -> Optional[int]:
    """Integer e with q^e == ratio, or None."""
    if ratio <= 0:
        return None
    num, den = ratio.numerator, ratio.denominator
    if den == 1:
        e = 0
        while num % q == 0:
            num //= q
            e += 1
        return e if num == 1 else None
    if num != 1:
        return None
    inverse = _exact_log(Fraction(den), q)
    return -inverse if inverse is not None else None


def euler_poincare_constant(
    ctx: Context,
    configurations: Optional[Iterable[Configuration]] = None,
    samples: int = 1000,
    seed: int = 0,
    exhaustive_limit: int = 12,
) -> EulerPoincareResult:
    """Check that log_q(|H^{i-1}(P)| / |H^{d-i-1}(Q + dual shell)|) + |P| is constant.

    Q is the dual configuration on the dual box. Boxes with at most
    ``exhaustive_limit`` plaquettes are checked exhaustively; larger ones on
    ``samples`` uniformly random configurations.

    Raises:
        InvalidContextError: If q < 2 or i is not in [1, d - 1]
        VerificationError: If two configurations give different constants
    """
    if ctx.q < 2:
        raise InvalidContextError("The Euler-Poincare exponent needs q >= 2")
    primal = ctx.replace(boundary=BoundaryCondition.free(), truncation_radius=None)
    dual = dual_context(primal)
    free_term = ClusterTerm(primal)
    wired_term = ClusterTerm(dual)
    n = ctx.n_plaquettes

    if configurations is None:
        if n <= exhaustive_limit:
            configurations = (Configuration(m, n) for m in range(1 << n))
        else:
            rng = np.random.default_rng(seed)
            configurations = (
                Configuration.from_indices(np.flatnonzero(rng.integers(0, 2, n)), n)
                for _ in range(samples)
            )

    c: Optional[int] = None
    checked = 0
    for P in configurations:
        Q = dual_configuration(P, primal)
        e = _exact_log(Fraction(free_term(P), wired_term(Q)), ctx.q)
        value = None if e is None else e + P.count()
        if value is None or (c is not None and value != c):
            report = VerificationReport(
                check="euler_poincare",
                passed=False,
                details={"expected": c, "got": value, "checked": checked},
                witness={"configuration": [format_cell(x) for x in primal.cells_of(P)]},
            )
            logger.error(f"Euler-Poincare exponent mismatch after {checked} configurations")
            raise VerificationError(report)
        c = value
        checked += 1
    logger.info(f"Euler-Poincare exponent c={c} over {checked} configurations")
    return EulerPoincareResult(c=c if c is not None else 0, checked=checked)
