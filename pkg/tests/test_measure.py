"""Tests for exact measures, pressure and null-homology probabilities."""

import math
from fractions import Fraction

import pytest

from prcm.errors import EnumerationLimitError, InvalidComplexError, InvalidContextError, NotACycleError
from prcm.lattice import parse_chain
from prcm.measure import (
    cluster_polynomial,
    cycle_vector,
    enumerate_measure,
    exact_density,
    is_null_homologous,
    null_homology_probability,
    plaquette_marginal,
    pressure,
    pressure_curve,
    weight,
)
from prcm.types import BoundaryCondition, Cell, Configuration

# Cycle joining the left and right ends of the horizontal line through the center
ACROSS = "1 anchor=(4,2);dirs={} | -1 anchor=(0,2);dirs={}"


class TestEnumeration:
    """Test exact tables."""

    def test_single_edge_marginal(self, single_edge):
        """d=1, q=2, p=1/2: P(open) = 1/3 and Z = 3."""
        table = enumerate_measure(single_edge)
        assert table.Z == Fraction(3)
        assert table.marginal(0) == Fraction(1, 3)
        assert table.marginal(Cell((0,), (0,))) == Fraction(1, 3)
        assert table.Y == Fraction(6)

    def test_weight_formula(self, single_edge):
        """weight = p^k (1-p)^(N-k) times the cluster term."""
        assert weight(Configuration(0, 1), single_edge) == Fraction(2)
        assert weight(Configuration(1, 1), single_edge) == Fraction(1)

    def test_probabilities_sum_to_one(self, square_open):
        """The table is a probability distribution."""
        table = enumerate_measure(square_open)
        assert sum(table.probabilities) == 1
        assert len(table.weights) == 16

    def test_q_one_is_bernoulli(self, square_open):
        """At q = 1 plaquettes are independent with probability p."""
        ctx = square_open.replace(q=1, p=Fraction(1, 3))
        table = enumerate_measure(ctx)
        assert all(table.marginal(k) == Fraction(1, 3) for k in range(4))

    def test_p_zero_and_one(self, square_open):
        """p = 0 is all closed and p = 1 all open."""
        closed = enumerate_measure(square_open.replace(p=Fraction(0)))
        assert closed.probability(0) == 1
        full = enumerate_measure(square_open.replace(p=Fraction(1)))
        assert full.probability(15) == 1
        assert full.Y is None

    def test_wired_marginal_exceeds_free(self, square_open):
        """Wiring the shell raises every plaquette marginal."""
        free = enumerate_measure(square_open)
        wired = enumerate_measure(square_open.replace(boundary=BoundaryCondition.wired()))
        assert all(wired.marginal(k) > free.marginal(k) for k in range(4))

    def test_symmetry_of_open_square(self, square_open):
        """All four edges of the open square are equivalent under symmetry."""
        table = enumerate_measure(square_open)
        assert len({table.marginal(k) for k in range(4)}) == 1
        assert plaquette_marginal(square_open, 2) == table.marginal(2)

    def test_conditional(self, square_open):
        """Conditioning on plaquette 0 open renormalizes the table."""
        table = enumerate_measure(square_open)
        law = table.conditional(lambda P: P.is_open(0))
        assert sum(law.values()) == 1
        assert all(mask & 1 for mask in law)
        with pytest.raises(ValueError):
            table.conditional(lambda P: False)

    def test_integer_weights_proportional(self, square_open):
        """Integer weights are the rational weights times den(p)^N."""
        ctx = square_open.replace(p=Fraction(2, 5))
        table = enumerate_measure(ctx)
        scale = Fraction(5) ** 4
        assert all(Fraction(iw) == w * scale for iw, w in zip(table.integer_weights(), table.weights))

    def test_workers_give_same_table(self, square_closed):
        """Chunked enumeration across processes merges in mask order."""
        serial = enumerate_measure(square_closed, workers=1)
        parallel = enumerate_measure(square_closed, workers=2)
        assert parallel.weights == serial.weights

    def test_enumeration_cap(self, square_closed, monkeypatch):
        """PRCM_ENUMERATION_CAP bounds the plaquette count."""
        monkeypatch.setenv("PRCM_ENUMERATION_CAP", "8")
        with pytest.raises(EnumerationLimitError):
            enumerate_measure(square_closed)
        with pytest.raises(EnumerationLimitError):
            enumerate_measure(square_closed, cap=11)

    def test_context_cap_overrides_environment(self, square_closed, monkeypatch):
        """A cap carried by the context wins over PRCM_ENUMERATION_CAP."""
        monkeypatch.setenv("PRCM_ENUMERATION_CAP", "20")
        capped = square_closed.replace(enumeration_cap=8)
        assert capped == square_closed
        with pytest.raises(EnumerationLimitError):
            enumerate_measure(capped)
        with pytest.raises(EnumerationLimitError):
            cluster_polynomial(capped)
        monkeypatch.setenv("PRCM_ENUMERATION_CAP", "4")
        assert enumerate_measure(square_closed.replace(enumeration_cap=12)).size == 12


class TestPressure:
    """Test the free energy and its derivative."""

    def test_cluster_polynomial_single_edge(self, single_edge):
        """Y(pi) = 4 + 2 e^pi for one edge at q = 2."""
        assert cluster_polynomial(single_edge) == (4, 2)

    def test_density_matches_finite_difference(self, square_open):
        """df/dpi equals E[#open] / N."""
        summary = pressure(square_open.replace(p=Fraction(1, 3)))
        table = enumerate_measure(square_open.replace(p=Fraction(1, 3)))
        assert summary.density == table.expectation(lambda P: P.count()) / 4
        assert summary.discrepancy < 1e-6

    def test_free_energy_value(self, single_edge):
        """f = log(Y) / N with Y = 4 + 2 x at x = p / (1 - p)."""
        summary = pressure(single_edge)
        assert summary.Y == 6
        assert summary.pi == 0.0
        assert summary.free_energy == pytest.approx(math.log(6))
        assert exact_density((4, 2), Fraction(1)) == Fraction(1, 3)

    def test_pressure_needs_interior_p(self, single_edge):
        """pi is infinite at p = 1."""
        with pytest.raises(InvalidContextError):
            pressure(single_edge.replace(p=Fraction(1)))

    def test_curve_is_convex(self, square_open):
        """f is convex in pi."""
        curve = pressure_curve(square_open, [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0])
        assert curve.is_convex
        assert list(curve.densities) == sorted(curve.densities)


class TestNullHomology:
    """Test cycles and null-homology probabilities."""

    def test_cycle_vector_rejects_non_cycle(self, square_open):
        """Cells of the wrong dimension and chains with a boundary are rejected."""
        with pytest.raises(InvalidComplexError):
            cycle_vector(square_open, {Cell((0, 2), (0,)): 1})
        with pytest.raises(NotACycleError):
            cycle_vector(square_open.replace(i=2), {Cell((0, 2), (0,)): 1})

    def test_cycle_outside_box(self, square_open):
        """Cells outside the skeleton are rejected."""
        with pytest.raises(InvalidComplexError):
            cycle_vector(square_open, {Cell((8, 8)): 1})

    def test_across_needs_both_edges(self, square_open):
        """The two ends of the center line are joined only by both horizontal edges."""
        vector = cycle_vector(square_open, parse_chain(ACROSS))
        left, right = (square_open.plaquettes.id_of(Cell((0, 2), (0,))),
                       square_open.plaquettes.id_of(Cell((2, 2), (0,))))
        both = Configuration.from_indices([left, right], 4)
        assert is_null_homologous(square_open, vector, both)
        assert not is_null_homologous(square_open, vector, Configuration.from_indices([left], 4))

    def test_probability_matches_table(self, square_open):
        """P(null) is the probability both horizontal edges are open."""
        table = enumerate_measure(square_open)
        left = square_open.plaquettes.id_of(Cell((0, 2), (0,)))
        right = square_open.plaquettes.id_of(Cell((2, 2), (0,)))
        expected = sum(
            (pr for mask, pr in enumerate(table.probabilities) if mask >> left & 1 and mask >> right & 1),
            Fraction(0),
        )
        assert null_homology_probability(square_open, parse_chain(ACROSS)) == expected

    def test_multiple_of_q_is_always_null(self, square_open):
        """q times any cycle vanishes modulo q."""
        doubled = {cell: 2 * coef for cell, coef in parse_chain(ACROSS).items()}
        assert null_homology_probability(square_open, doubled) == 1
