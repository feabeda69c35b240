"""Executable identities of the finite-volume model.

Each check enumerates exactly and returns a VerificationReport. With
``strict=True`` a failed check logs the witness and raises
VerificationError carrying the report.
"""

import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .boundary import ClusterTerm, stabilize_truncation
from .context import Context, dual_context
from .errors import InvalidContextError, StabilizationError, VerificationError
from .homology import euler_poincare_constant, wired_size
from .lattice import boundary_shell, dual_configuration, enumerate_cells, format_cell
from .measure import MeasureTable, enumerate_measure
from .report import VerificationReport
from .types import BoundaryCondition, BoundaryKind, Box, Cell, Configuration

logger = logging.getLogger(__name__)

__all__ = [
    "verify_duality",
    "verify_fkg",
    "verify_holley",
    "verify_lattice_conditions",
    "verify_extremality",
    "verify_conditioning",
    "verify_box_monotonicity",
    "verify_ep",
    "verify_stabilization",
    "verify_wired_routes",
]


def finish_report(report: VerificationReport, strict: bool) -> VerificationReport:
    if report.passed:
        logger.info(f"{report.check} passed")
        return report
    logger.error(f"{report.check} failed: witness={report.witness}")
    if strict:
        raise VerificationError(report)
    return report


def _cells(ctx: Context, mask: int) -> List[str]:
    return [format_cell(ctx.plaquettes.cell_of(k)) for k in range(ctx.n_plaquettes) if mask >> k & 1]


# ============================================================
# Duality
# ============================================================

def verify_duality(ctx: Context, strict: bool = True) -> VerificationReport:
    """mu(P) == mu*(Q) for every P, with Q the dual configuration on the dual context."""
    dual = dual_context(ctx)
    primal_table = enumerate_measure(ctx)
    dual_table = enumerate_measure(dual)
    worst = Fraction(0)
    witness = None
    for P in primal_table.configurations():
        Q = dual_configuration(P, ctx)
        gap = abs(primal_table.probability(P) - dual_table.probability(Q))
        if gap > worst:
            worst = gap
            if witness is None:
                witness = {
                    "configuration": _cells(ctx, P.mask),
                    "mu": primal_table.probability(P),
                    "mu_dual": dual_table.probability(Q),
                }
    report = VerificationReport(
        check="duality",
        passed=worst == 0,
        details={
            "p": ctx.p,
            "p_star": dual.p,
            "dual_boundary": dual.boundary.kind.value,
            "max_discrepancy": worst,
            "configs_checked": len(primal_table.weights),
        },
        witness=witness,
    )
    return finish_report(report, strict)


# ============================================================
# FKG and Holley
# ============================================================

def verify_fkg(ctx: Context, strict: bool = True) -> VerificationReport:
    """FKG lattice condition over all incomparable pairs, plus positive
    correlation of every pair of single-plaquette events.
    """
    table = enumerate_measure(ctx)
    w = table.integer_weights()
    total = len(w)
    pairs = 0
    witness = None
    for a in range(total):
        for b in range(a + 1, total):
            meet, join = a & b, a | b
            if meet == a or meet == b:
                continue
            pairs += 1
            if w[join] * w[meet] < w[a] * w[b]:
                witness = {"P": _cells(ctx, a), "P_prime": _cells(ctx, b)}
                break
        if witness:
            break

    correlations = 0
    if witness is None:
        n = ctx.n_plaquettes
        marginals = [table.marginal(k) for k in range(n)]
        for j in range(n):
            for k in range(j + 1, n):
                both = sum(
                    (pr for mask, pr in enumerate(table.probabilities) if mask >> j & 1 and mask >> k & 1),
                    Fraction(0),
                )
                correlations += 1
                if both < marginals[j] * marginals[k]:
                    witness = {
                        "events": [format_cell(ctx.plaquettes.cell_of(j)), format_cell(ctx.plaquettes.cell_of(k))],
                        "covariance": both - marginals[j] * marginals[k],
                    }
                    break
            if witness:
                break

    report = VerificationReport(
        check="fkg",
        passed=witness is None,
        details={"pairs_checked": pairs, "correlations_checked": correlations},
        witness=witness,
    )
    return finish_report(report, strict)


def _open_ratios(table: MeasureTable, j: int) -> Dict[int, Fraction]:
    """w(W + j) / w(W) for every W not containing j."""
    w = table.integer_weights()
    bit = 1 << j
    return {mask: Fraction(w[mask | bit], w[mask]) for mask in range(len(w)) if not mask & bit}


def verify_holley(lower: Context, upper: Context, strict: bool = True) -> VerificationReport:
    """Holley cross-condition: P_upper(j open | Z) >= P_lower(j open | W) for W <= Z.

    Passing implies ``lower`` is stochastically dominated by ``upper``. For
    each plaquette the largest lower-side ratio over submasks of Z is found
    by a subset-maximum sweep, so every (W, Z) pair is covered.

    Raises:
        InvalidContextError: If the contexts differ in plaquettes or p is 0 or 1
    """
    if lower.plaquettes.cells != upper.plaquettes.cells:
        raise InvalidContextError("Holley comparison needs the same plaquettes in both contexts")
    for ctx in (lower, upper):
        if not 0 < ctx.p < 1:
            raise InvalidContextError(f"Holley comparison needs 0 < p < 1, got {ctx.p}")
    low_table = enumerate_measure(lower)
    high_table = enumerate_measure(upper)
    n = lower.n_plaquettes
    checked = 0
    witness = None
    for j in range(n):
        low = _open_ratios(low_table, j)
        high = _open_ratios(high_table, j)
        best = {mask: (ratio, mask) for mask, ratio in low.items()}
        for b in range(n):
            if b == j:
                continue
            bit = 1 << b
            for mask in best:
                if mask & bit and best[mask ^ bit][0] > best[mask][0]:
                    best[mask] = best[mask ^ bit]
        for Z, ratio in high.items():
            checked += 1
            top, W = best[Z]
            if ratio < top:
                witness = {
                    "plaquette": format_cell(lower.plaquettes.cell_of(j)),
                    "W": _cells(lower, W),
                    "Z": _cells(lower, Z),
                }
                break
        if witness:
            break
    report = VerificationReport(
        check="holley",
        passed=witness is None,
        details={
            "lower": lower.boundary.kind.value,
            "upper": upper.boundary.kind.value,
            "conditions_checked": checked,
        },
        witness=witness,
    )
    return finish_report(report, strict)


def verify_lattice_conditions(
    ctx: Context,
    ctx2: Optional[Context] = None,
    strict: bool = True,
) -> VerificationReport:
    """FKG for ``ctx`` and, when given, Holley domination of ``ctx`` by ``ctx2``."""
    parts = [verify_fkg(ctx, strict=strict)]
    if ctx2 is not None:
        parts.append(verify_holley(ctx, ctx2, strict=strict))
    failed = next((r for r in parts if not r.passed), None)
    return VerificationReport(
        check="lattice_conditions",
        passed=failed is None,
        details={r.check: r.details for r in parts},
        witness=failed.witness if failed else None,
    )


def verify_extremality(ctx: Context, strict: bool = True) -> VerificationReport:
    """Free <= ctx <= Wired on the same box, each by the Holley condition."""
    free = ctx.replace(boundary=BoundaryCondition.free(), truncation_radius=None)
    wired = ctx.replace(boundary=BoundaryCondition.wired(), truncation_radius=None)
    lower = verify_holley(free, ctx, strict=strict)
    upper = verify_holley(ctx, wired, strict=strict)
    failed = next((r for r in (lower, upper) if not r.passed), None)
    return VerificationReport(
        check="extremality",
        passed=failed is None,
        details={"free_below": lower.details, "wired_above": upper.details},
        witness=failed.witness if failed else None,
    )


# ============================================================
# Conditioning and boxes
# ============================================================

def _inner_boundary(
    outer: Context,
    annulus: Sequence[Cell],
    outside_open: frozenset,
) -> BoundaryCondition:
    kind = outer.boundary.kind
    if kind in (BoundaryKind.FREE, BoundaryKind.PLAQUETTES):
        opened = set(outer.boundary.cells) | {c for c in annulus if c in outside_open}
        return BoundaryCondition.plaquettes(opened)
    closed = {c for c in annulus if c not in outside_open}
    if kind == BoundaryKind.WIRED:
        # boundary plaquettes of a closed box are wired open whatever their state
        closed -= set(boundary_shell(outer.box, outer.i))
    return BoundaryCondition.wired_at_infinity(closed | set(outer.boundary.cells))


def verify_conditioning(
    outer: Context,
    inner_box: Box,
    outside_open: Iterable[Cell] = (),
    strict: bool = True,
) -> VerificationReport:
    """Conditioning the outer measure on the plaquettes outside ``inner_box``
    gives the inner measure with those states added to the boundary condition.

    ``outside_open`` lists the open plaquettes of the outer context lying
    outside the inner box; all other such plaquettes are closed.

    Raises:
        InvalidContextError: If the inner plaquettes are not outer plaquettes
    """
    inner_cells = enumerate_cells(inner_box, outer.i, outer.i)
    missing = [c for c in inner_cells if c not in outer.plaquettes]
    if missing:
        raise InvalidContextError(f"Inner plaquette {format_cell(missing[0])} is not in the outer box")
    inner_set = set(inner_cells)
    annulus = [c for c in outer.plaquettes if c not in inner_set]
    opened = frozenset(outside_open)
    stray = [c for c in opened if c not in annulus]
    if stray:
        raise InvalidContextError(f"{format_cell(stray[0])} is not an outer plaquette outside the inner box")

    inner = Context(
        box=inner_box,
        i=outer.i,
        q=outer.q,
        p=outer.p,
        boundary=_inner_boundary(outer, annulus, opened),
        enumeration_cap=outer.enumeration_cap,
    )
    outer_table = enumerate_measure(outer)
    inner_table = enumerate_measure(inner)

    fixed_mask = sum(1 << outer.plaquettes.id_of(c) for c in opened)
    annulus_mask = sum(1 << outer.plaquettes.id_of(c) for c in annulus)
    positions = [outer.plaquettes.id_of(c) for c in inner.plaquettes]

    conditional = outer_table.conditional(lambda P: P.mask & annulus_mask == fixed_mask)
    witness = None
    for P in inner_table.configurations():
        outer_mask = fixed_mask | sum(1 << pos for k, pos in enumerate(positions) if P.mask >> k & 1)
        expected = conditional.get(outer_mask, Fraction(0))
        if inner_table.probability(P) != expected:
            witness = {
                "inner_configuration": _cells(inner, P.mask),
                "inner": inner_table.probability(P),
                "conditioned": expected,
            }
            break
    report = VerificationReport(
        check="conditioning",
        passed=witness is None,
        details={
            "outer_boundary": outer.boundary.kind.value,
            "inner_boundary": inner.boundary.kind.value,
            "inner_plaquettes": inner.n_plaquettes,
            "annulus_plaquettes": len(annulus),
            "configs_checked": len(inner_table.weights),
        },
        witness=witness,
    )
    return finish_report(report, strict)


def verify_box_monotonicity(
    contexts: Sequence[Context],
    sigma: Cell,
    strict: bool = True,
) -> VerificationReport:
    """Along nested boxes, free marginals of sigma never decrease and wired
    marginals never increase.

    Raises:
        InvalidContextError: If boundaries are mixed or not free/wired, or boxes are not nested
    """
    kinds = {ctx.boundary.kind for ctx in contexts}
    if len(kinds) != 1 or not kinds <= {BoundaryKind.FREE, BoundaryKind.WIRED}:
        raise InvalidContextError("Box monotonicity needs contexts sharing a free or wired boundary")
    for small, large in zip(contexts, contexts[1:]):
        if not large.box.contains_box(small.box):
            raise InvalidContextError("Box monotonicity needs increasing nested boxes")
    increasing = kinds == {BoundaryKind.FREE}
    marginals = [enumerate_measure(ctx).marginal(sigma) for ctx in contexts]
    witness = None
    for k in range(len(marginals) - 1):
        a, b = marginals[k], marginals[k + 1]
        if (b < a) if increasing else (b > a):
            witness = {"box_index": k, "marginals": [a, b]}
            break
    report = VerificationReport(
        check="box_monotonicity",
        passed=witness is None,
        details={
            "boundary": next(iter(kinds)).value,
            "plaquette": format_cell(sigma),
            "marginals": marginals,
        },
        witness=witness,
    )
    return finish_report(report, strict)


# ============================================================
# Euler-Poincare, stabilization, wired routes
# ============================================================

def verify_ep(
    ctx: Context,
    samples: int = 1000,
    seed: int = 0,
    strict: bool = True,
) -> VerificationReport:
    """Report form of ``euler_poincare_constant``."""
    try:
        result = euler_poincare_constant(ctx, samples=samples, seed=seed)
    except VerificationError as e:
        if strict:
            raise
        return e.report
    report = VerificationReport(
        check="euler_poincare",
        passed=True,
        details={"c": result.c, "configs_checked": result.checked, "seed": seed},
    )
    return finish_report(report, strict)


def verify_stabilization(
    ctx: Context,
    max_radius: int = 6,
    strict: bool = True,
) -> VerificationReport:
    """Certify a truncation radius for a Plaquettes or WiredAtInfinity context."""
    try:
        cert = stabilize_truncation(ctx, max_radius=max_radius)
    except StabilizationError as e:
        report = VerificationReport(
            check="stabilization",
            passed=False,
            details={"max_radius": max_radius},
            witness={"reason": str(e)},
        )
        return finish_report(report, strict)
    report = VerificationReport(
        check="stabilization",
        passed=True,
        details={"radius": cert.radius, "radii_tested": list(cert.radii_tested)},
    )
    return finish_report(report, strict)


def verify_wired_routes(ctx: Context, strict: bool = True) -> VerificationReport:
    """Three wired cluster terms agree on every configuration.

    The Howell image against the boundary shell and the cohomology of
    P + shell must be equal; the WiredAtInfinity(empty) truncation must be
    proportional to them.
    """
    base = ctx.replace(boundary=BoundaryCondition.wired(), truncation_radius=None)
    shell_term = ClusterTerm(base)
    at_infinity = ClusterTerm(ctx.replace(boundary=BoundaryCondition.wired_at_infinity(), truncation_radius=None))
    n = ctx.n_plaquettes
    first: Optional[Tuple[int, int]] = None
    witness = None
    for mask in range(1 << n):
        P = Configuration(mask, n)
        image = shell_term(P)
        cohomology = wired_size(base.percolation_complex(P), ctx.box, ctx.i, ctx.q)
        truncated = at_infinity(P)
        if first is None:
            first = (image, truncated)
        if image != cohomology or image * first[1] != truncated * first[0]:
            witness = {
                "configuration": _cells(ctx, mask),
                "shell_image": image,
                "cohomology": cohomology,
                "at_infinity": truncated,
            }
            break
    report = VerificationReport(
        check="wired_routes",
        passed=witness is None,
        details={"configs_checked": 1 << n, "radius": at_infinity.radius},
        witness=witness,
    )
    return finish_report(report, strict)
