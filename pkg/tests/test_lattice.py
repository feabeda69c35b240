"""Tests for cells, boxes, boundaries, duality and the cell text format."""

import pytest
from hypothesis import given, strategies as st

from prcm.errors import InvalidCellError, InvalidDimensionError
from prcm.lattice import (
    CellComplex,
    boundary_shell,
    box_complex,
    cell_boundary,
    chain_boundary,
    dual_box,
    dual_cell,
    dual_configuration,
    enumerate_cells,
    expand_box,
    format_cell,
    parse_cell,
    parse_chain,
    support_radius,
)
from prcm.types import Box, Cell, Configuration, Convention


@st.composite
def cells(draw, max_d=4):
    d = draw(st.integers(1, max_d))
    parity = draw(st.integers(0, 1))
    anchor = tuple(2 * draw(st.integers(-3, 3)) + parity for _ in range(d))
    dirs = tuple(sorted(draw(st.sets(st.integers(0, d - 1)))))
    return Cell(anchor, dirs)


class TestCells:
    """Test cell and box value types."""

    def test_cell_rejects_mixed_parity(self):
        """Anchors must be all even or all odd."""
        with pytest.raises(InvalidCellError):
            Cell((0, 1), (0,))

    def test_cell_rejects_duplicate_dirs(self):
        """A direction may appear once."""
        with pytest.raises(InvalidCellError):
            Cell((0, 0), (1, 1))

    def test_cell_normalizes_dir_order(self):
        """Directions are stored sorted."""
        assert Cell((0, 0, 0), (2, 0)).dirs == (0, 2)

    def test_center_is_doubled(self):
        """Edge from the origin along axis 1 has doubled center (1, 0)."""
        assert Cell((0, 0), (0,)).center == (1, 0)

    def test_box_from_primal_doubles_corners(self):
        """Primal corners are stored doubled."""
        box = Box.from_primal((0, 0), (2, 3))
        assert box.lo == (0, 0)
        assert box.hi == (4, 6)
        assert box.is_primal

    def test_box_rejects_empty_axis(self):
        """lo > hi on an axis is an error."""
        with pytest.raises(InvalidCellError):
            Box((2,), (0,))


class TestEnumeration:
    """Test cell enumeration under both conventions."""

    def test_open_square_has_four_edges(self):
        """Open [0,2]^2 keeps the four edges meeting the interior."""
        box = Box.from_primal((0, 0), (2, 2), Convention.OPEN)
        assert len(enumerate_cells(box, 1, 1)) == 4

    def test_closed_square_has_twelve_edges(self):
        """Closed [0,2]^2 keeps every edge."""
        box = Box.from_primal((0, 0), (2, 2), Convention.CLOSED)
        assert len(enumerate_cells(box, 1, 1)) == 12

    def test_lower_dimensions_ignore_convention(self):
        """Cells below dimension i are always those of the closed box."""
        box = Box.from_primal((0, 0), (2, 2), Convention.OPEN)
        assert len(enumerate_cells(box, 0, 1)) == 9

    def test_closed_four_cube_has_24_squares(self):
        """Closed [0,1]^4 has C(4,2) = 6 directions times 4 anchors of 2-cells."""
        box = Box.from_primal((0,) * 4, (1,) * 4, Convention.CLOSED)
        assert len(enumerate_cells(box, 2, 2)) == 24

    def test_enumeration_is_sorted(self):
        """Cells come out in (anchor, dirs) order."""
        box = Box.from_primal((0, 0), (2, 2), Convention.CLOSED)
        listed = enumerate_cells(box, 1)
        assert listed == sorted(listed)

    def test_dimension_out_of_range(self):
        """k > d is rejected."""
        box = Box.from_primal((0, 0), (1, 1))
        with pytest.raises(InvalidDimensionError):
            enumerate_cells(box, 3)

    def test_boundary_shell_excludes_interior(self):
        """Only the center vertex of [0,2]^2 is off the shell."""
        box = Box.from_primal((0, 0), (2, 2), Convention.CLOSED)
        shell = boundary_shell(box, 0)
        assert len(shell) == 8
        assert Cell((2, 2)) not in shell

    def test_expand_box_and_support_radius(self):
        """A cell one unit outside needs radius 1."""
        box = Box.from_primal((0, 0), (1, 1))
        outside = Cell((-2, 0), (0,))
        assert support_radius(box, [outside]) == 1
        assert expand_box(box, 1).contains_cell(outside)
        assert support_radius(box, []) == 0


class TestBoundary:
    """Test the signed cubical boundary."""

    def test_edge_boundary_is_head_minus_tail(self):
        """d(edge) = head - tail."""
        faces = cell_boundary(Cell((0, 0), (0,)))
        assert faces == {Cell((2, 0)): 1, Cell((0, 0)): -1}

    def test_vertex_has_empty_boundary(self):
        """Vertices have no faces."""
        assert cell_boundary(Cell((0, 0))) == {}

    def test_square_boundary_has_four_faces(self):
        """A 2-cell has four signed edges."""
        faces = cell_boundary(Cell((0, 0), (0, 1)))
        assert len(faces) == 4
        assert set(faces.values()) == {1, -1}

    @given(cells())
    def test_boundary_of_boundary_vanishes(self, cell):
        """d(d(c)) = 0 for every cell."""
        assert chain_boundary(chain_boundary({cell: 1})) == {}


class TestDuality:
    """Test dual cells, boxes and configurations."""

    def test_dual_of_planar_edge(self):
        """Edge (0,0) along axis 1 pairs with the dual edge (1,-1) along axis 2."""
        assert dual_cell(Cell((0, 0), (0,))) == Cell((1, -1), (1,))

    @given(cells())
    def test_dual_cell_is_involution(self, cell):
        """Dualizing twice returns the cell and keeps the center."""
        dual = dual_cell(cell)
        assert dual.center == cell.center
        assert dual.dim == cell.d - cell.dim
        assert dual.is_primal != cell.is_primal
        assert dual_cell(dual) == cell

    def test_dual_box_swaps_convention(self):
        """Open [0,2]^2 pairs with the closed dual box [1/2, 3/2]^2."""
        dual = dual_box(Box.from_primal((0, 0), (2, 2), Convention.OPEN))
        assert dual.lo == (1, 1)
        assert dual.hi == (3, 3)
        assert dual.convention == Convention.CLOSED
        assert dual_box(dual) == Box.from_primal((0, 0), (2, 2), Convention.OPEN)

    def test_dual_plaquettes_match(self, square_open):
        """Plaquettes of the box and of its dual are in bijection."""
        dual = dual_box(square_open.box)
        duals = {dual_cell(c) for c in square_open.plaquettes}
        assert duals == set(enumerate_cells(dual, 1, 1))

    def test_dual_configuration_opens_closed_duals(self, square_open):
        """Empty P maps to the full dual configuration and vice versa."""
        n = square_open.n_plaquettes
        assert dual_configuration(Configuration.empty(n), square_open) == Configuration.full(n)
        assert dual_configuration(Configuration.full(n), square_open) == Configuration.empty(n)

    def test_too_thin_open_box_has_no_dual(self):
        """An open box of width zero cannot be dualized."""
        with pytest.raises(InvalidCellError):
            dual_box(Box.from_primal((0, 0), (0, 1)))


class TestTextFormat:
    """Test the anchor/dirs text format."""

    def test_format_uses_one_based_dirs(self):
        """Directions print 1-based."""
        assert format_cell(Cell((0, 2), (1,))) == "anchor=(0,2);dirs={2}"

    def test_parse_inverts_format(self):
        """Parsing a formatted cell gives it back."""
        cell = Cell((1, -1, 3), (0, 2))
        assert parse_cell(format_cell(cell)) == cell

    def test_parse_vertex(self):
        """Empty dirs parse as a vertex."""
        assert parse_cell("anchor=(2,4);dirs={}") == Cell((2, 4))

    def test_parse_rejects_garbage(self):
        """Malformed text raises InvalidCellError."""
        with pytest.raises(InvalidCellError):
            parse_cell("anchor=0,0;dirs=1")

    def test_parse_chain_sums_terms(self):
        """Chains accept '|' separators, signs and repeated cells."""
        chain = parse_chain(
            "1 anchor=(0,0);dirs={} | -1 anchor=(2,0);dirs={} | anchor=(0,0);dirs={}"
        )
        assert chain == {Cell((0, 0)): 2, Cell((2, 0)): -1}


class TestCellComplex:
    """Test complexes assembled from cells."""

    def test_with_cells_adds_dimension(self):
        """Adding a 2-cell raises the complex dimension."""
        box = Box.from_primal((0, 0), (1, 1), Convention.CLOSED)
        edges = CellComplex({0: enumerate_cells(box, 0), 1: enumerate_cells(box, 1)})
        assert edges.dimension == 1
        filled = edges.with_cells(enumerate_cells(box, 2))
        assert filled.dimension == 2
        assert Cell((0, 0), (0, 1)) in filled

    @pytest.mark.parametrize("convention,edges", [(Convention.OPEN, 4), (Convention.CLOSED, 12)])
    def test_box_complex_counts(self, convention, edges):
        """The closed skeleton is shared; only the top cells follow the convention."""
        complex_ = box_complex(Box.from_primal((0, 0), (2, 2), convention), 1)
        assert len(complex_.index(0)) == 9
        assert len(complex_.index(1)) == edges
        assert complex_.dimension == 1

    def test_box_complex_is_all_open_configuration(self, square_open):
        """A context's full complex is its percolation complex with every plaquette open."""
        full = square_open.percolation_complex(Configuration.full(square_open.n_plaquettes))
        expected = box_complex(square_open.box, 1)
        for k in (0, 1):
            assert full.cells(k) == expected.cells(k)
        assert square_open.full_complex.cells(1) == square_open.plaquettes.cells
