"""Joint law of Potts lattice gauge spins and plaquette configurations.

On the free complex of a context (the (i-1)-skeleton of the box plus its
plaquettes) the coupling

    kappa(f, P) ~ prod over plaquettes s of
                  (1 - p) [s not in P] + p [s in P and (delta f)(s) = 0]

has the plaquette random-cluster measure as its P-marginal and the Potts
lattice gauge law nu(f) ~ exp(-beta H(f)) as its f-marginal, with
p = 1 - exp(-beta). Since exp(-beta) = 1 - p, nu(f) is proportional to
(1 - p)^(number of violated plaquettes) and stays rational.

Both conditional laws are exact and simple: given f, plaquettes with
(delta f)(s) = 0 open independently with probability p; given P, f is
uniform on the cocycles of P.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .context import Context
from .errors import EnumerationLimitError, InvalidContextError
from .measure import (
    cycle_vector,
    enumerate_measure,
    is_null_homologous,
    null_homology_probability,
    plaquette_boundary_matrix,
)
from .report import VerificationReport
from .sampler import SampleStats, batch_means
from .types import BoundaryKind, Cell, Configuration
from .verify import finish_report
from .zq_linalg import IntMatrix, ModuleMapSummary, kernel_mod, uniform_solution_sample

logger = logging.getLogger(__name__)

# Largest q^(#spin cells) enumerated exactly
SPIN_ENUMERATION_CAP = 1 << 16

WILSON_ESTIMATORS = ("indicator", "character", "character_average", "null_homology")


def _require_free(ctx: Context) -> None:
    if ctx.boundary.kind != BoundaryKind.FREE:
        raise InvalidContextError(
            f"The gauge coupling is defined on the free complex, got {ctx.boundary.kind.value} boundary"
        )


# ============================================================
# Spins and energy
# ============================================================

@dataclass(frozen=True)
class SpinConfig:
    """Z_q values on the (i-1)-cells of the context skeleton, in index order."""
    values: Tuple[int, ...]
    q: int

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        bad = [v for v in values if not 0 <= v < self.q]
        if bad:
            raise ValueError(f"Spin values must lie in [0, {self.q}), got {bad[0]}")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, ctx: Context) -> "SpinConfig":
        return cls((0,) * len(ctx.skeleton.index(ctx.i - 1)), ctx.q)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)


@lru_cache(maxsize=64)
def coboundary(ctx: Context) -> IntMatrix:
    """delta on (i-1)-cochains: one row per plaquette, one column per (i-1)-cell."""
    return plaquette_boundary_matrix(ctx).transpose()


def _coboundary_array(ctx: Context) -> np.ndarray:
    return coboundary(ctx).to_array(ctx.q)


def satisfied_plaquettes(ctx: Context, f: SpinConfig) -> np.ndarray:
    """Boolean mask of plaquettes with (delta f)(s) = 0 mod q."""
    return (_coboundary_array(ctx) @ f.as_array()) % ctx.q == 0


def plgt_energy(ctx: Context, f: SpinConfig) -> int:
    """H(f) = -(number of plaquettes with (delta f)(s) = 0)."""
    return -int(satisfied_plaquettes(ctx, f).sum())


# ============================================================
# Conditional samplers
# ============================================================

def sample_complex_given_spins(ctx: Context, f: SpinConfig, rng: np.random.Generator) -> Configuration:
    """Open each satisfied plaquette independently with probability p."""
    satisfied = satisfied_plaquettes(ctx, f)
    draws = rng.random(ctx.n_plaquettes) < float(ctx.p)
    return Configuration.from_indices(np.flatnonzero(satisfied & draws), ctx.n_plaquettes)


@lru_cache(maxsize=4096)
def _cocycle_constraints(ctx: Context, mask: int) -> Tuple[IntMatrix, ModuleMapSummary]:
    rows = [k for k in range(ctx.n_plaquettes) if mask >> k & 1]
    M = coboundary(ctx).select_rows(rows)
    return M, kernel_mod(M, ctx.q)


def sample_spins_given_complex(ctx: Context, P: Configuration, rng: np.random.Generator) -> SpinConfig:
    """Uniform f with (delta f)(s) = 0 on every open plaquette of P."""
    ctx.check_configuration(P)
    M, kernel = _cocycle_constraints(ctx, P.mask)
    values = uniform_solution_sample(M, [0] * M.rows, ctx.q, rng, kernel=kernel)
    return SpinConfig(tuple(int(v) for v in values), ctx.q)


# ============================================================
# Wilson observables
# ============================================================

def wilson_value(vector: Sequence[int], f: SpinConfig) -> int:
    """f evaluated on the cycle, in Z_q."""
    return int(sum(int(g) * v for g, v in zip(vector, f.values)) % f.q)


def spin_estimators(vector: Sequence[int], f: SpinConfig) -> Dict[str, float]:
    """Spin-side Wilson estimators for one sample.

    indicator           [f(gamma) = 0]
    character           cos(2 pi f(gamma) / q)
    character_average   mean over the q - 1 nontrivial characters

    Given a cycle that does not bound, f(gamma) is uniform on a nontrivial
    subgroup of Z_q. The character averages to zero on every such subgroup;
    the character average only on Z_q itself. It is exact for prime q; for
    composite q it fails e.g. for twice a loop at q = 4, where f(gamma)
    only reaches {0, 2}.
    """
    q = f.q
    x = wilson_value(vector, f)
    if q == 1:
        return {"indicator": 1.0, "character": 1.0, "character_average": 1.0}
    hit = 1.0 if x == 0 else 0.0
    return {
        "indicator": hit,
        "character": math.cos(2 * math.pi * x / q),
        "character_average": (q * hit - 1) / (q - 1),
    }


# ============================================================
# Coupled chain
# ============================================================

@dataclass
class CoupledState:
    """Joint (spins, plaquettes) state of the alternating chain."""
    ctx: Context
    spins: SpinConfig
    configuration: Configuration
    rng: np.random.Generator
    sweeps: int = 0


def coupled_sweep(state: CoupledState) -> CoupledState:
    """Resample spins given plaquettes, then plaquettes given spins."""
    state.spins = sample_spins_given_complex(state.ctx, state.configuration, state.rng)
    state.configuration = sample_complex_given_spins(state.ctx, state.spins, state.rng)
    state.sweeps += 1
    return state


@dataclass
class CoupledRun:
    """Recorded output of a coupled chain after burn-in."""
    stats: Dict[str, SampleStats]
    configurations: Counter
    spins: Counter
    joint: Counter
    sweeps: int
    burn_in: int
    seed: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "stats": {name: s.to_dict() for name, s in self.stats.items()},
            "sweeps": self.sweeps,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }


def run_coupled_chain(
    ctx: Context,
    sweeps: int,
    burn_in: int = 0,
    seed: int = 0,
    gamma: Optional[Mapping[Cell, int]] = None,
) -> CoupledRun:
    """Alternating chain from (f = 0, P empty), recording density, energy and,
    with ``gamma``, every Wilson estimator.

    Raises:
        InvalidContextError: If the context boundary is not free
        ValueError: If sweeps <= burn_in or burn_in < 0
    """
    _require_free(ctx)
    if burn_in < 0 or sweeps <= burn_in:
        raise ValueError(f"Need sweeps > burn_in >= 0, got sweeps={sweeps}, burn_in={burn_in}")
    vector = cycle_vector(ctx, gamma) if gamma is not None else None
    state = CoupledState(
        ctx=ctx,
        spins=SpinConfig.zeros(ctx),
        configuration=Configuration.empty(ctx.n_plaquettes),
        rng=np.random.default_rng(seed),
    )
    records: Dict[str, List[float]] = {"density": [], "energy": []}
    if vector is not None:
        records.update({name: [] for name in WILSON_ESTIMATORS})
    configurations: Counter = Counter()
    spins: Counter = Counter()
    joint: Counter = Counter()
    null_cache: Dict[int, float] = {}
    n = ctx.n_plaquettes

    for t in range(sweeps):
        coupled_sweep(state)
        if t < burn_in:
            continue
        P, f = state.configuration, state.spins
        configurations[P.mask] += 1
        spins[f.values] += 1
        joint[(f.values, P.mask)] += 1
        records["density"].append(P.count() / n if n else 0.0)
        records["energy"].append(float(plgt_energy(ctx, f)))
        if vector is not None:
            for name, value in spin_estimators(vector, f).items():
                records[name].append(value)
            if P.mask not in null_cache:
                null_cache[P.mask] = 1.0 if is_null_homologous(ctx, vector, P) else 0.0
            records["null_homology"].append(null_cache[P.mask])

    stats = {name: batch_means(name, values) for name, values in records.items()}
    logger.info(f"Coupled chain finished: {sweeps} sweeps, burn-in {burn_in}")
    return CoupledRun(stats, configurations, spins, joint, sweeps, burn_in, seed)


def wilson_estimate(
    ctx: Context,
    gamma: Mapping[Cell, int],
    sweeps: int,
    burn_in: int = 0,
    seed: int = 0,
) -> Dict[str, SampleStats]:
    """Monte Carlo estimates of every Wilson estimator from one coupled chain."""
    run = run_coupled_chain(ctx, sweeps, burn_in, seed, gamma=gamma)
    return {name: run.stats[name] for name in WILSON_ESTIMATORS}


# ============================================================
# Exact laws
# ============================================================

def _spin_space(ctx: Context) -> int:
    cells = len(ctx.skeleton.index(ctx.i - 1))
    size = ctx.q ** cells
    if size > SPIN_ENUMERATION_CAP:
        raise EnumerationLimitError(size, SPIN_ENUMERATION_CAP, what="spin assignments")
    return cells


def exact_gauge_law(ctx: Context) -> Dict[Tuple[int, ...], Fraction]:
    """nu(f) proportional to (1 - p)^(number of violated plaquettes)."""
    _require_free(ctx)
    cells = _spin_space(ctx)
    delta = _coboundary_array(ctx)
    weights: Dict[Tuple[int, ...], Fraction] = {}
    for values in product(range(ctx.q), repeat=cells):
        violated = int(((delta @ np.asarray(values, dtype=np.int64)) % ctx.q != 0).sum())
        weights[values] = (1 - ctx.p) ** violated
    total = sum(weights.values(), Fraction(0))
    return {f: w / total for f, w in weights.items()}


def exact_joint_law(ctx: Context) -> Dict[Tuple[Tuple[int, ...], int], Fraction]:
    """kappa(f, P) over every spin assignment and every P of satisfied plaquettes."""
    _require_free(ctx)
    cells = _spin_space(ctx)
    delta = _coboundary_array(ctx)
    n = ctx.n_plaquettes
    p = ctx.p
    weights: Dict[Tuple[Tuple[int, ...], int], Fraction] = {}
    for values in product(range(ctx.q), repeat=cells):
        satisfied = (delta @ np.asarray(values, dtype=np.int64)) % ctx.q == 0
        allowed = sum(1 << int(k) for k in np.flatnonzero(satisfied))
        sub = allowed
        while True:
            k = bin(sub).count("1")
            w = p ** k * (1 - p) ** (n - k)
            if w:
                weights[(values, sub)] = w
            if sub == 0:
                break
            sub = (sub - 1) & allowed
    total = sum(weights.values(), Fraction(0))
    return {key: w / total for key, w in weights.items()}


def law_distance(histogram: Mapping, law: Mapping) -> float:
    """Total variation between visit counts and an exact law on the same keys."""
    total = sum(histogram.values())
    if total == 0:
        raise ValueError("Empty histogram")
    keys = set(histogram) | set(law)
    return sum(abs(histogram.get(k, 0) / total - float(law.get(k, 0))) for k in keys) / 2


def verify_coupling(ctx: Context, strict: bool = True) -> VerificationReport:
    """Both marginals of kappa match nu and the PRCM table exactly."""
    joint = exact_joint_law(ctx)
    gauge = exact_gauge_law(ctx)
    table = enumerate_measure(ctx)

    plaquette_marginal: Dict[int, Fraction] = {}
    spin_marginal: Dict[Tuple[int, ...], Fraction] = {}
    for (values, mask), pr in joint.items():
        plaquette_marginal[mask] = plaquette_marginal.get(mask, Fraction(0)) + pr
        spin_marginal[values] = spin_marginal.get(values, Fraction(0)) + pr

    witness = None
    for P in table.configurations():
        got = plaquette_marginal.get(P.mask, Fraction(0))
        if got != table.probability(P):
            witness = {"marginal": "plaquettes", "mask": P.mask, "kappa": got, "mu": table.probability(P)}
            break
    if witness is None:
        for values, pr in gauge.items():
            got = spin_marginal.get(values, Fraction(0))
            if got != pr:
                witness = {"marginal": "spins", "spins": list(values), "kappa": got, "nu": pr}
                break
    report = VerificationReport(
        check="coupling",
        passed=witness is None,
        details={
            "q": ctx.q,
            "p": ctx.p,
            "plaquettes": ctx.n_plaquettes,
            "spin_cells": len(ctx.skeleton.index(ctx.i - 1)),
            "joint_support": len(joint),
        },
        witness=witness,
    )
    return finish_report(report, strict)


# ============================================================
# Wilson certification
# ============================================================

@dataclass(frozen=True)
class WilsonCertificate:
    """Exact expectations of every Wilson estimator and which ones are faithful.

    An estimator is faithful when its expectation under the gauge law equals
    the null-homology probability of the cycle under the PRCM.
    """
    null_homology: Fraction
    expectations: Dict[str, Union[Fraction, float]] = field(default_factory=dict)
    faithful: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, object]:
        return {
            "null_homology": self.null_homology,
            "expectations": self.expectations,
            "faithful": list(self.faithful),
        }


def certify_wilson_estimator(
    ctx: Context,
    gamma: Mapping[Cell, int],
    tolerance: float = 1e-12,
) -> WilsonCertificate:
    """Compute every spin-side estimator exactly and compare with P([gamma] = 0).

    The indicator and character average are exact rationals; the character
    involves cosines and is compared within ``tolerance``.
    """
    vector = cycle_vector(ctx, gamma)
    target = null_homology_probability(ctx, gamma)
    gauge = exact_gauge_law(ctx)
    q = ctx.q

    law: Dict[int, Fraction] = {}
    for values, pr in gauge.items():
        x = wilson_value(vector, SpinConfig(values, q))
        law[x] = law.get(x, Fraction(0)) + pr
    hit = law.get(0, Fraction(0))

    expectations: Dict[str, Union[Fraction, float]] = {
        "indicator": hit,
        "character": sum(float(pr) * math.cos(2 * math.pi * x / q) for x, pr in law.items()),
        "character_average": (q * hit - 1) / (q - 1) if q > 1 else Fraction(1),
    }
    faithful = []
    for name, value in expectations.items():
        if isinstance(value, Fraction):
            ok = value == target
        else:
            ok = abs(value - float(target)) <= tolerance
        if ok:
            faithful.append(name)
    logger.info(f"Wilson certification: null-homology={target}, faithful={faithful}")
    return WilsonCertificate(target, expectations, tuple(faithful))
