"""Exact finite-volume plaquette random-cluster measures.

The weight of a configuration P of a context with N plaquettes is

    p^{|P|} (1 - p)^{N - |P|} * cluster(P)

where the cluster term comes from ``boundary.ClusterTerm`` for every
boundary condition. Tables are exact ``Fraction`` arithmetic throughout;
floats only appear in the pressure diagnostics, which are logarithms.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .boundary import ClusterTerm
from .config import context_cap, worker_count
from .context import Context, dual_context
from .errors import EnumerationLimitError, InvalidComplexError, InvalidContextError, NotACycleError
from .lattice import cell_boundary, chain_boundary, dual_configuration, format_cell
from .types import Cell, Configuration
from .zq_linalg import IntMatrix, solve_mod

logger = logging.getLogger(__name__)

__all__ = [
    "MeasureTable",
    "PressureSummary",
    "PressureCurve",
    "cluster_term",
    "weight",
    "enumerate_measure",
    "plaquette_marginal",
    "cluster_polynomial",
    "exact_density",
    "pressure",
    "pressure_curve",
    "plaquette_boundary_matrix",
    "cycle_vector",
    "is_null_homologous",
    "null_homology_probability",
    "dual_context",
    "dual_configuration",
]

# Central difference step in pi for the derivative identity
FINITE_DIFFERENCE_STEP = 1e-5


@lru_cache(maxsize=64)
def cluster_term(ctx: Context) -> ClusterTerm:
    """Shared, memoized cluster term of a context."""
    return ClusterTerm(ctx)


def _bernoulli_factor(ctx: Context, k: int) -> Fraction:
    n = ctx.n_plaquettes
    return ctx.p ** k * (1 - ctx.p) ** (n - k)


def weight(P: Configuration, ctx: Context) -> Fraction:
    """Unnormalized weight p^|P| (1-p)^(N-|P|) times the cluster term."""
    ctx.check_configuration(P)
    factor = _bernoulli_factor(ctx, P.count())
    if factor == 0:
        return Fraction(0)
    return factor * cluster_term(ctx)(P)


# ============================================================
# Exact tables
# ============================================================

@dataclass(frozen=True)
class MeasureTable:
    """Every configuration of a context with its exact weight.

    Index k of each tuple is the configuration with mask k.
    """
    ctx: Context
    clusters: Tuple[int, ...]
    weights: Tuple[Fraction, ...]
    Z: Fraction

    @property
    def size(self) -> int:
        return self.ctx.n_plaquettes

    @cached_property
    def probabilities(self) -> Tuple[Fraction, ...]:
        return tuple(w / self.Z for w in self.weights)

    @property
    def Y(self) -> Optional[Fraction]:
        """Rescaled partition function Z / (1 - p)^N (None at p = 1)."""
        if self.ctx.p == 1:
            return None
        return self.Z / (1 - self.ctx.p) ** self.size

    def configurations(self) -> Iterator[Configuration]:
        for mask in range(len(self.weights)):
            yield Configuration(mask, self.size)

    def probability(self, P: Union[Configuration, int]) -> Fraction:
        mask = P.mask if isinstance(P, Configuration) else P
        return self.probabilities[mask]

    def marginal(self, sigma: Union[Cell, int]) -> Fraction:
        """P(sigma open)."""
        k = self.ctx.plaquettes.id_of(sigma) if isinstance(sigma, Cell) else sigma
        return sum(
            (pr for mask, pr in enumerate(self.probabilities) if mask >> k & 1),
            Fraction(0),
        )

    def expectation(self, observable: Callable[[Configuration], Union[int, Fraction]]) -> Fraction:
        total = Fraction(0)
        for P, pr in zip(self.configurations(), self.probabilities):
            if pr:
                total += pr * observable(P)
        return total

    def conditional(self, event: Callable[[Configuration], bool]) -> Dict[int, Fraction]:
        """Law conditioned on ``event``, as {mask: probability}.

        Raises:
            ValueError: If the event has probability zero
        """
        kept = {P.mask: pr for P, pr in zip(self.configurations(), self.probabilities) if event(P)}
        mass = sum(kept.values(), Fraction(0))
        if mass == 0:
            raise ValueError("Conditioning on an event of probability zero")
        return {mask: pr / mass for mask, pr in kept.items()}

    def integer_weights(self) -> Tuple[int, ...]:
        """Weights scaled by den(p)^N: a^k (b - a)^(N - k) * cluster for p = a/b."""
        a, b = self.ctx.p.numerator, self.ctx.p.denominator
        n = self.size
        return tuple(
            a ** k * (b - a) ** (n - k) * c
            for k, c in ((bin(mask).count("1"), c) for mask, c in enumerate(self.clusters))
        )


def _cluster_chunk(args: Tuple[Context, int, int]) -> List[int]:
    ctx, start, stop = args
    term = cluster_term(ctx)
    n = ctx.n_plaquettes
    return [term(Configuration(m, n)) for m in range(start, stop)]


def enumerate_measure(
    ctx: Context,
    cap: Optional[int] = None,
    workers: Optional[int] = None,
) -> MeasureTable:
    """Exact table over all 2^N configurations.

    Cluster terms are computed in contiguous mask ranges, across worker
    processes when ``workers`` (or PRCM_WORKERS) is above 1, and merged in
    index order.

    Raises:
        EnumerationLimitError: If N exceeds the cap (the context cap, else PRCM_ENUMERATION_CAP)
    """
    cap = context_cap(ctx) if cap is None else cap
    n = ctx.n_plaquettes
    if n > cap:
        raise EnumerationLimitError(n, cap)
    workers = worker_count() if workers is None else workers
    total = 1 << n

    if workers > 1 and total >= 256:
        step = -(-total // workers)
        chunks = [(ctx, s, min(s + step, total)) for s in range(0, total, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            clusters = [c for part in pool.map(_cluster_chunk, chunks) for c in part]
    else:
        clusters = _cluster_chunk((ctx, 0, total))

    factors = [_bernoulli_factor(ctx, k) for k in range(n + 1)]
    weights = tuple(factors[bin(m).count("1")] * c for m, c in enumerate(clusters))
    Z = sum(weights, Fraction(0))
    logger.info(
        f"Enumerated {total} configurations (d={ctx.d}, i={ctx.i}, q={ctx.q}, "
        f"p={ctx.p}, boundary={ctx.boundary.kind.value}, workers={workers})"
    )
    return MeasureTable(ctx=ctx, clusters=tuple(clusters), weights=weights, Z=Z)


def plaquette_marginal(ctx: Context, sigma: Union[Cell, int]) -> Fraction:
    """Exact P(sigma open) by enumeration."""
    return enumerate_measure(ctx).marginal(sigma)


# ============================================================
# Pressure
# ============================================================

def cluster_polynomial(ctx: Context) -> Tuple[int, ...]:
    """Coefficients a_k with Y(pi) = sum_k a_k e^{k pi}."""
    n = ctx.n_plaquettes
    cap = context_cap(ctx)
    if n > cap:
        raise EnumerationLimitError(n, cap)
    term = cluster_term(ctx)
    coeffs = [0] * (n + 1)
    for mask in range(1 << n):
        coeffs[bin(mask).count("1")] += term(Configuration(mask, n))
    return tuple(coeffs)


def _log_y(coeffs: Sequence[int], pi: float) -> float:
    terms = np.array([math.log(a) + k * pi for k, a in enumerate(coeffs) if a])
    return float(np.logaddexp.reduce(terms))


def _free_energy(coeffs: Sequence[int], pi: float) -> float:
    return _log_y(coeffs, pi) / (len(coeffs) - 1)


def exact_density(coeffs: Sequence[int], x: Fraction) -> Fraction:
    """E[#open] / N at odds x = p / (1 - p), exactly."""
    n = len(coeffs) - 1
    y = sum((a * x ** k for k, a in enumerate(coeffs)), Fraction(0))
    top = sum((k * a * x ** k for k, a in enumerate(coeffs)), Fraction(0))
    return top / (n * y)


@dataclass(frozen=True)
class PressureSummary:
    """Pressure data at one parameter point.

    ``pi`` is log(p / (1 - p)); ``density`` is the exact E[#open] / N and
    ``finite_difference`` the central difference of ``free_energy`` in pi.
    """
    pi: float
    Y: Fraction
    free_energy: float
    density: Fraction
    finite_difference: float

    @property
    def discrepancy(self) -> float:
        return abs(float(self.density) - self.finite_difference)


def pressure(ctx: Context, step: float = FINITE_DIFFERENCE_STEP) -> PressureSummary:
    """Y, f = log(Y) / N and df/dpi checked against a central difference.

    Raises:
        InvalidContextError: If p is 0 or 1 (pi is infinite) or the context has no plaquettes
    """
    if not 0 < ctx.p < 1:
        raise InvalidContextError(f"Pressure needs 0 < p < 1, got {ctx.p}")
    if ctx.n_plaquettes == 0:
        raise InvalidContextError("Pressure needs at least one plaquette")
    coeffs = cluster_polynomial(ctx)
    x = ctx.p / (1 - ctx.p)
    pi = math.log(x.numerator) - math.log(x.denominator)
    y = sum((a * x ** k for k, a in enumerate(coeffs)), Fraction(0))
    fd = (_free_energy(coeffs, pi + step) - _free_energy(coeffs, pi - step)) / (2 * step)
    return PressureSummary(
        pi=pi,
        Y=y,
        free_energy=_free_energy(coeffs, pi),
        density=exact_density(coeffs, x),
        finite_difference=fd,
    )


@dataclass(frozen=True)
class PressureCurve:
    """Free energy over a grid of pi values and its discrete convexity.

    ``second_differences`` are differences of consecutive slopes; f is
    convex in pi exactly when all of them are nonnegative.
    """
    pis: Tuple[float, ...]
    free_energies: Tuple[float, ...]
    densities: Tuple[float, ...]
    second_differences: Tuple[float, ...]

    @property
    def is_convex(self) -> bool:
        return all(s >= -1e-12 for s in self.second_differences)


def pressure_curve(ctx: Context, pis: Sequence[float]) -> PressureCurve:
    """Evaluate f(pi) on an increasing grid, reusing one cluster polynomial."""
    grid = sorted(float(v) for v in pis)
    coeffs = cluster_polynomial(ctx)
    n = len(coeffs) - 1
    values = [_free_energy(coeffs, pi) for pi in grid]
    densities = []
    for pi in grid:
        log_y = _log_y(coeffs, pi)
        weighted = [(k, math.log(a) + k * pi - log_y) for k, a in enumerate(coeffs) if a]
        densities.append(sum(k * math.exp(t) for k, t in weighted) / n)
    slopes = [
        (values[k + 1] - values[k]) / (grid[k + 1] - grid[k]) for k in range(len(grid) - 1)
    ]
    second = tuple(slopes[k + 1] - slopes[k] for k in range(len(slopes) - 1))
    return PressureCurve(tuple(grid), tuple(values), tuple(densities), second)


# ============================================================
# Null-homology probabilities
# ============================================================

@lru_cache(maxsize=64)
def plaquette_boundary_matrix(ctx: Context) -> IntMatrix:
    """d_i restricted to the plaquettes: rows are the skeleton's (i-1)-cells."""
    faces = ctx.skeleton.index(ctx.i - 1)
    entries = []
    for col, cell in enumerate(ctx.plaquettes):
        for face, sign in cell_boundary(cell).items():
            entries.append((faces.id_of(face), col, sign))
    return IntMatrix(len(faces), ctx.n_plaquettes, tuple(entries))


def cycle_vector(ctx: Context, gamma: Mapping[Cell, int]) -> np.ndarray:
    """Coefficient vector of an (i-1)-cycle over the skeleton's (i-1)-cells.

    Raises:
        InvalidComplexError: If a cell of gamma is not an (i-1)-cell of the box
        NotACycleError: If gamma has nonzero boundary over Z
    """
    faces = ctx.skeleton.index(ctx.i - 1)
    vector = np.zeros(len(faces), dtype=object)
    for cell, coef in gamma.items():
        if cell.dim != ctx.i - 1 or cell not in faces:
            raise InvalidComplexError(
                f"{format_cell(cell)} is not an ({ctx.i - 1})-cell of the context box"
            )
        vector[faces.id_of(cell)] += coef
    boundary = chain_boundary(gamma)
    if boundary:
        raise NotACycleError(f"Chain has nonzero boundary on {len(boundary)} cells")
    return vector


def is_null_homologous(ctx: Context, vector: Sequence[int], P: Configuration) -> bool:
    """Whether the cycle is a boundary of open plaquettes of P, modulo q."""
    if ctx.q == 1:
        return True
    columns = plaquette_boundary_matrix(ctx).select_columns(P.open_indices())
    target = [int(v) % ctx.q for v in vector]
    return solve_mod(columns, target, ctx.q) is not None


def null_homology_probability(ctx: Context, gamma: Mapping[Cell, int]) -> Fraction:
    """P([gamma] = 0 in H_{i-1}(P; Z_q)) under the exact measure."""
    vector = cycle_vector(ctx, gamma)
    table = enumerate_measure(ctx)
    total = Fraction(0)
    for P, pr in zip(table.configurations(), table.probabilities):
        if pr and is_null_homologous(ctx, vector, P):
            total += pr
    return total
