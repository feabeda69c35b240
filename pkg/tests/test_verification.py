"""Tests for the exact identity checks: duality, FKG, Holley, conditioning."""

from fractions import Fraction

import pytest

from prcm.errors import InvalidContextError, VerificationError
from prcm.types import BoundaryCondition, Box, Cell, Convention
from prcm.verify import (
    verify_box_monotonicity,
    verify_conditioning,
    verify_duality,
    verify_ep,
    verify_extremality,
    verify_fkg,
    verify_holley,
    verify_lattice_conditions,
    verify_stabilization,
)

DANGLING = Cell((-2, 2), (0,))
# Shell edge of the open square at its lower-left corner
CORNER = Cell((0, 0), (0,))


class TestDuality:
    """Test exact primal/dual equality of configuration probabilities."""

    def test_planar_square(self, square_open):
        """Open [0,2]^2 at q=2, p=1/2 matches the wired dual at p*=2/3."""
        report = verify_duality(square_open)
        assert report.passed
        assert report.details["p_star"] == Fraction(2, 3)
        assert report.details["dual_boundary"] == "wired"
        assert report.details["max_discrepancy"] == 0
        assert report.details["configs_checked"] == 16

    @pytest.mark.parametrize("q", [1, 2, 3, 4])
    @pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
    def test_closed_box_grid(self, square_closed, q, p):
        """Closed [0,2]^2 matches its wired dual across the q, p grid."""
        report = verify_duality(square_closed.replace(q=q, p=p))
        assert report.passed
        assert report.details["dual_boundary"] == "wired"
        assert report.details["configs_checked"] == 1 << 12

    @pytest.mark.parametrize("q", [1, 2, 3, 4])
    @pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
    @pytest.mark.parametrize("kind,dual_kind", [
        ("plaquettes", "wired_at_infinity"),
        ("wired_at_infinity", "plaquettes"),
    ])
    def test_corner_boundaries(self, square_open, q, p, kind, dual_kind):
        """Plaquettes and WiredAtInfinity of a corner edge dualize to each other."""
        boundary = BoundaryCondition(kind, frozenset([CORNER]))
        report = verify_duality(square_open.replace(q=q, p=p, boundary=boundary))
        assert report.passed
        assert report.details["dual_boundary"] == dual_kind

    @pytest.mark.parametrize("i", [1, 2])
    def test_three_dimensions(self, context_factory, i):
        """Edges pair with dual faces and faces with dual edges in d=3."""
        ctx = context_factory((0, 0, 0), (1, 1, 1), i=i, convention=Convention.CLOSED)
        assert verify_duality(ctx).passed

    def test_plaquette_boundary(self, square_open):
        """Plaquettes(S) pairs with WiredAtInfinity of the dual cells."""
        ctx = square_open.replace(boundary=BoundaryCondition.plaquettes([DANGLING]))
        report = verify_duality(ctx)
        assert report.passed
        assert report.details["dual_boundary"] == "wired_at_infinity"


class TestLatticeConditions:
    """Test FKG and Holley."""

    @pytest.mark.parametrize("q,p", [(2, Fraction(1, 2)), (3, Fraction(1, 3)), (4, Fraction(3, 4))])
    def test_fkg_free(self, square_open, q, p):
        """The free measure satisfies the FKG lattice condition."""
        report = verify_fkg(square_open.replace(q=q, p=p))
        assert report.passed
        assert report.details["pairs_checked"] > 0
        assert report.details["correlations_checked"] == 6

    def test_fkg_wired_three_dimensions(self, context_factory):
        """Faces of the closed unit cube under a wired boundary."""
        ctx = context_factory(
            (0, 0, 0), (1, 1, 1), i=2, convention=Convention.CLOSED, boundary=BoundaryCondition.wired()
        )
        assert verify_fkg(ctx).passed

    def test_free_below_wired(self, square_open):
        """Wired dominates free."""
        wired = square_open.replace(boundary=BoundaryCondition.wired())
        report = verify_holley(square_open, wired)
        assert report.passed
        assert report.details["conditions_checked"] == 4 * 8

    def test_wired_not_below_free(self, square_open):
        """The reverse domination fails with a witness."""
        wired = square_open.replace(boundary=BoundaryCondition.wired())
        report = verify_holley(wired, square_open, strict=False)
        assert not report.passed
        assert report.witness["plaquette"].startswith("anchor=")
        with pytest.raises(VerificationError) as info:
            verify_holley(wired, square_open)
        assert info.value.report.check == "holley"

    def test_holley_needs_same_plaquettes(self, square_open, square_closed):
        """Different boxes cannot be compared."""
        with pytest.raises(InvalidContextError):
            verify_holley(square_open, square_closed)

    def test_lattice_conditions_combined(self, square_open):
        """FKG plus Holley in one report."""
        wired = square_open.replace(boundary=BoundaryCondition.wired())
        report = verify_lattice_conditions(square_open, wired)
        assert report.passed
        assert set(report.details) == {"fkg", "holley"}

    def test_extremality_of_plaquette_boundary(self, square_open):
        """Free <= Plaquettes(S) <= Wired."""
        ctx = square_open.replace(boundary=BoundaryCondition.plaquettes([DANGLING]))
        assert verify_extremality(ctx).passed


class TestConditioning:
    """Test conditioning on the plaquettes outside an inner box."""

    INNER = Box.from_primal((0, 0), (1, 1), Convention.CLOSED)
    OPENED = [Cell((2, 2), (0,)), Cell((0, 2), (1,))]

    @pytest.mark.parametrize("opened", [[], OPENED])
    def test_free_outer(self, square_closed, opened):
        """Free outer gives Plaquettes(open annulus) inside."""
        report = verify_conditioning(square_closed, self.INNER, opened)
        assert report.passed
        assert report.details["inner_boundary"] == "plaquettes"
        assert report.details["annulus_plaquettes"] == 8

    @pytest.mark.parametrize("opened", [[], OPENED])
    def test_wired_outer(self, square_closed, opened):
        """Wired outer gives WiredAtInfinity(closed annulus) inside."""
        outer = square_closed.replace(boundary=BoundaryCondition.wired())
        report = verify_conditioning(outer, self.INNER, opened)
        assert report.passed
        assert report.details["inner_boundary"] == "wired_at_infinity"

    @pytest.mark.parametrize("opened", [[], OPENED])
    def test_plaquette_outer(self, square_closed, opened):
        """Plaquettes(S) outer gives Plaquettes(S plus the open annulus) inside."""
        outer = square_closed.replace(boundary=BoundaryCondition.plaquettes([DANGLING]))
        report = verify_conditioning(outer, self.INNER, opened)
        assert report.passed
        assert report.details["inner_boundary"] == "plaquettes"

    @pytest.mark.parametrize("opened", [[], OPENED])
    def test_wired_at_infinity_outer(self, square_closed, opened):
        """WiredAtInfinity(T) outer gives WiredAtInfinity(T plus the closed annulus) inside."""
        outer = square_closed.replace(boundary=BoundaryCondition.wired_at_infinity([DANGLING]))
        report = verify_conditioning(outer, self.INNER, opened)
        assert report.passed
        assert report.details["inner_boundary"] == "wired_at_infinity"

    def test_inner_must_fit(self, square_open):
        """Inner plaquettes must be outer plaquettes."""
        with pytest.raises(InvalidContextError):
            verify_conditioning(square_open, Box.from_primal((0, 0), (3, 3), Convention.CLOSED))

    def test_opened_cells_must_be_outside(self, square_closed):
        """Open cells are taken from the annulus only."""
        with pytest.raises(InvalidContextError):
            verify_conditioning(square_closed, self.INNER, [Cell((0, 0), (0,))])


class TestMonotonicity:
    """Test marginals along nested boxes."""

    BOXES = [((0, 0), (1, 1)), ((0, 0), (2, 1)), ((0, 0), (2, 2))]
    SIGMA = Cell((0, 0), (0,))

    def _contexts(self, factory, boundary):
        return [
            factory(lo, hi, convention=Convention.CLOSED, boundary=boundary) for lo, hi in self.BOXES
        ]

    def test_free_increases(self, context_factory):
        """Free marginals never decrease as the box grows."""
        report = verify_box_monotonicity(self._contexts(context_factory, BoundaryCondition.free()), self.SIGMA)
        assert report.passed
        marginals = report.details["marginals"]
        assert marginals == sorted(marginals)

    def test_wired_decreases(self, context_factory):
        """Wired marginals never increase as the box grows."""
        report = verify_box_monotonicity(self._contexts(context_factory, BoundaryCondition.wired()), self.SIGMA)
        assert report.passed

    def test_mixed_boundaries_rejected(self, context_factory):
        """All contexts must share one boundary kind."""
        contexts = self._contexts(context_factory, BoundaryCondition.free())
        contexts[-1] = contexts[-1].replace(boundary=BoundaryCondition.wired())
        with pytest.raises(InvalidContextError):
            verify_box_monotonicity(contexts, self.SIGMA)


class TestReports:
    """Test the report forms of the Euler-Poincare and stabilization checks."""

    def test_ep_report(self, square_open):
        """The exponent is constant over every configuration."""
        report = verify_ep(square_open)
        assert report.passed
        assert report.details["configs_checked"] == 16
        assert isinstance(report.details["c"], int)

    def test_stabilization_report(self, square_open):
        """A dangling open edge stabilizes at its support radius."""
        ctx = square_open.replace(boundary=BoundaryCondition.plaquettes([DANGLING]))
        report = verify_stabilization(ctx)
        assert report.passed
        assert report.details["radius"] == 1

    def test_stabilization_failure(self, square_open):
        """A cap below the support radius fails, strictly or not."""
        ctx = square_open.replace(boundary=BoundaryCondition.plaquettes([DANGLING]))
        report = verify_stabilization(ctx, max_radius=0, strict=False)
        assert not report.passed
        assert "reason" in report.witness
        with pytest.raises(VerificationError):
            verify_stabilization(ctx, max_radius=0)
