"""Heat-bath Markov chains for the plaquette random-cluster model.

A sweep visits every plaquette in index order (systematic scan) and
resamples it from its exact conditional law given the rest:

    P(sigma open | rest) = p c1 / (p c1 + (1 - p) c0)

with c1, c0 the cluster terms of the two completions. Under a free boundary
c0 / c1 is the order of the class of the boundary of sigma.

Randomness is numpy's PCG64. Independent chains take the children of
``SeedSequence(seed).spawn(n)`` in order, so chain k of a run is always
seeded the same way.
"""

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import worker_count
from .context import Context
from .errors import VerificationError
from .measure import MeasureTable, cluster_term, cycle_vector, is_null_homologous
from .report import VerificationReport
from .types import Cell, Configuration

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence]

# Batch doubling stops once lag-1 autocorrelation of batch means drops below this
AUTOCORRELATION_TARGET = 0.1
MIN_BATCHES = 2


def open_probability(ctx: Context, P: Configuration, k: int) -> Fraction:
    """Exact conditional probability that plaquette k is open given the others."""
    term = cluster_term(ctx)
    c1 = term(P.with_open(k))
    c0 = term(P.with_closed(k))
    numerator = ctx.p * c1
    denominator = numerator + (1 - ctx.p) * c0
    return numerator / denominator


# ============================================================
# Observables
# ============================================================

def density(P: Configuration) -> float:
    return P.count() / P.size if P.size else 0.0


def open_count(P: Configuration) -> float:
    return float(P.count())


class NullHomologyIndicator:
    """1 when the cycle bounds in the open plaquettes of P, else 0."""

    def __init__(self, ctx: Context, gamma: Mapping[Cell, int]):
        self.ctx = ctx
        self.vector = cycle_vector(ctx, gamma)
        self._cache: Dict[int, float] = {}

    def __call__(self, P: Configuration) -> float:
        value = self._cache.get(P.mask)
        if value is None:
            value = 1.0 if is_null_homologous(self.ctx, self.vector, P) else 0.0
            self._cache[P.mask] = value
        return value


BUILTIN_OBSERVABLES: Dict[str, Callable[[Configuration], float]] = {
    "density": density,
    "open_count": open_count,
}

Observables = Union[Sequence[str], Mapping[str, Callable[[Configuration], float]]]


def _resolve_observables(observables: Observables) -> Dict[str, Callable[[Configuration], float]]:
    if isinstance(observables, Mapping):
        return dict(observables)
    unknown = [name for name in observables if name not in BUILTIN_OBSERVABLES]
    if unknown:
        raise ValueError(f"Unknown chain observables {unknown}; pass callables for these")
    return {name: BUILTIN_OBSERVABLES[name] for name in observables}


# ============================================================
# Chain state and updates
# ============================================================

@dataclass
class ChainState:
    """Current configuration of one chain and its conditional-probability cache.

    The cache maps (mask with plaquette k closed, k) to the float open
    probability, which depends only on the other plaquettes. With ``debug``
    set every cache hit is recomputed exactly and compared.

    The cache is never evicted: a chain on N plaquettes can hold up to
    N 2^(N-1) entries, which the enumeration cap keeps small for contexts
    that are checked against exact tables. ``max_cache`` bounds it for
    longer runs on larger boxes; once full, new conditionals are computed
    but not stored.
    """
    ctx: Context
    configuration: Configuration
    rng: np.random.Generator
    sweeps: int = 0
    debug: bool = False
    max_cache: Optional[int] = None
    _cache: Dict[Tuple[int, int], float] = field(default_factory=dict, repr=False)

    def probability(self, k: int) -> float:
        rest = self.configuration.with_closed(k)
        key = (rest.mask, k)
        value = self._cache.get(key)
        if value is None:
            value = float(open_probability(self.ctx, rest, k))
            if self.max_cache is None or len(self._cache) < self.max_cache:
                self._cache[key] = value
        elif self.debug:
            self._check(rest, k, value)
        return value

    def _check(self, rest: Configuration, k: int, cached: float) -> None:
        exact = float(open_probability(self.ctx, rest, k))
        if exact != cached:
            report = VerificationReport(
                check="chain_cache",
                passed=False,
                details={"sweeps": self.sweeps, "plaquette": k},
                witness={"mask": rest.mask, "cached": cached, "exact": exact},
            )
            logger.error(f"Chain cache out of date at sweep {self.sweeps}")
            raise VerificationError(report)


def _update(state: ChainState, k: int, u: float) -> None:
    if u < state.probability(k):
        state.configuration = state.configuration.with_open(k)
    else:
        state.configuration = state.configuration.with_closed(k)


def heat_bath_step(state: ChainState, k: int, rng: Optional[np.random.Generator] = None) -> ChainState:
    """Resample plaquette k from its exact conditional law."""
    u = (rng or state.rng).random()
    _update(state, k, u)
    return state


def sweep(state: ChainState) -> ChainState:
    """One systematic scan over all plaquettes with pre-drawn uniforms."""
    uniforms = state.rng.random(state.ctx.n_plaquettes)
    for k, u in enumerate(uniforms):
        _update(state, k, u)
    state.sweeps += 1
    return state


# ============================================================
# Statistics
# ============================================================

@dataclass(frozen=True)
class SampleStats:
    """Mean with a batch-means standard error.

    ``batches`` is the number of batches behind ``stderr`` (always >= 2).
    """
    name: str
    mean: float
    variance: float
    stderr: float
    batches: int
    batch_size: int
    samples: int

    def to_dict(self) -> Dict[str, float]:
        return {
            "name": self.name,
            "mean": self.mean,
            "variance": self.variance,
            "stderr": self.stderr,
            "batches": self.batches,
            "batch_size": self.batch_size,
            "samples": self.samples,
        }


def _lag1(values: np.ndarray) -> float:
    centered = values - values.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        return 0.0
    return float(np.dot(centered[:-1], centered[1:])) / denom


def batch_means(name: str, samples: Sequence[float]) -> SampleStats:
    """Batch-means error with automatic batch doubling.

    The batch size doubles while the lag-1 autocorrelation of the batch
    means exceeds AUTOCORRELATION_TARGET and at least 2 * MIN_BATCHES
    batches remain.

    Raises:
        ValueError: If fewer than two samples are given
    """
    data = np.asarray(samples, dtype=float)
    n = len(data)
    if n < MIN_BATCHES:
        raise ValueError(f"Batch means needs at least {MIN_BATCHES} samples, got {n}")
    size = 1
    while True:
        count = n // size
        means = data[: count * size].reshape(count, size).mean(axis=1)
        rho = _lag1(means)
        if rho <= AUTOCORRELATION_TARGET or count // 2 < MIN_BATCHES:
            break
        size *= 2
    logger.debug(f"Batch means for {name}: size={size} batches={count} lag1={rho:.3f}")
    stderr = float(means.std(ddof=1) / math.sqrt(count))
    return SampleStats(
        name=name,
        mean=float(data.mean()),
        variance=float(data.var(ddof=1)),
        stderr=stderr,
        batches=count,
        batch_size=size,
        samples=n,
    )


def total_variation(histogram: Mapping[int, int], table: MeasureTable) -> float:
    """TV distance between visit frequencies (by mask) and an exact table."""
    total = sum(histogram.values())
    if total == 0:
        raise ValueError("Empty histogram")
    distance = 0.0
    for mask, exact in enumerate(table.probabilities):
        distance += abs(histogram.get(mask, 0) / total - float(exact))
    return distance / 2


# ============================================================
# Running chains
# ============================================================

@dataclass
class ChainRun:
    """Recorded output of one chain after burn-in."""
    stats: Dict[str, SampleStats]
    histogram: Counter
    final: Configuration
    sweeps: int
    burn_in: int
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "stats": {name: s.to_dict() for name, s in self.stats.items()},
            "sweeps": self.sweeps,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }


def run_chain(
    ctx: Context,
    sweeps: int,
    burn_in: int = 0,
    seed: Seed = 0,
    observables: Observables = ("density",),
    initial: Optional[Configuration] = None,
    debug: bool = False,
    max_cache: Optional[int] = None,
) -> ChainRun:
    """Heat-bath chain from the empty configuration (or ``initial``).

    Observables and the visit histogram are recorded after every sweep past
    ``burn_in``. Equal seeds give identical runs. ``max_cache`` bounds the
    conditional cache (see ChainState).

    Raises:
        ValueError: If sweeps <= burn_in or burn_in < 0
    """
    if burn_in < 0 or sweeps <= burn_in:
        raise ValueError(f"Need sweeps > burn_in >= 0, got sweeps={sweeps}, burn_in={burn_in}")
    recorders = _resolve_observables(observables)
    n = ctx.n_plaquettes
    state = ChainState(
        ctx=ctx,
        configuration=initial if initial is not None else Configuration.empty(n),
        rng=np.random.default_rng(seed),
        debug=debug,
        max_cache=max_cache,
    )
    ctx.check_configuration(state.configuration)
    records: Dict[str, List[float]] = {name: [] for name in recorders}
    histogram: Counter = Counter()
    for t in range(sweeps):
        sweep(state)
        if t < burn_in:
            continue
        P = state.configuration
        histogram[P.mask] += 1
        for name, fn in recorders.items():
            records[name].append(fn(P))
    stats = {name: batch_means(name, values) for name, values in records.items()}
    logger.info(f"Chain finished: {sweeps} sweeps, burn-in {burn_in}, {n} plaquettes")
    return ChainRun(
        stats=stats,
        histogram=histogram,
        final=state.configuration,
        sweeps=sweeps,
        burn_in=burn_in,
        seed=seed if isinstance(seed, int) else None,
    )


@dataclass
class MultiChainRun:
    """Independent chains merged in chain order."""
    chains: List[ChainRun]
    stats: Dict[str, SampleStats]
    histogram: Counter
    seed: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "seed": self.seed,
            "chains": len(self.chains),
            "stats": {name: s.to_dict() for name, s in self.stats.items()},
            "per_chain": [c.to_dict() for c in self.chains],
        }


def _merge(name: str, parts: Sequence[SampleStats]) -> SampleStats:
    k = len(parts)
    return SampleStats(
        name=name,
        mean=sum(s.mean for s in parts) / k,
        variance=sum(s.variance for s in parts) / k,
        stderr=math.sqrt(sum(s.stderr ** 2 for s in parts)) / k,
        batches=sum(s.batches for s in parts),
        batch_size=max(s.batch_size for s in parts),
        samples=sum(s.samples for s in parts),
    )


def _run_one(args) -> ChainRun:
    ctx, sweeps, burn_in, child, observables = args
    return run_chain(ctx, sweeps, burn_in, child, observables)


def run_chains(
    ctx: Context,
    sweeps: int,
    burn_in: int = 0,
    seed: int = 0,
    chains: int = 1,
    observables: Observables = ("density",),
    workers: Optional[int] = None,
) -> MultiChainRun:
    """Run independent chains seeded by ``SeedSequence(seed).spawn(chains)``.

    Chains run in worker processes when ``workers`` (or PRCM_WORKERS) is
    above 1; observables must then be picklable.

    Raises:
        ValueError: If chains < 1
    """
    if chains < 1:
        raise ValueError(f"Need at least one chain, got chains={chains}")
    children = np.random.SeedSequence(seed).spawn(chains)
    jobs = [(ctx, sweeps, burn_in, child, observables) for child in children]
    workers = worker_count() if workers is None else workers
    if workers > 1 and chains > 1:
        with ProcessPoolExecutor(max_workers=min(workers, chains)) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(job) for job in jobs]
    histogram: Counter = Counter()
    for run in runs:
        histogram.update(run.histogram)
    names = list(runs[0].stats)
    stats = {name: _merge(name, [r.stats[name] for r in runs]) for name in names}
    logger.info(f"Merged {chains} chains (seed={seed}, workers={workers})")
    return MultiChainRun(chains=runs, stats=stats, histogram=histogram, seed=seed)
