"""Chain slices and the homology route interface.

Every route computes |H_k(X; Z_q)| from the same ChainSlice, so routes can
be swapped and cross-checked. A route must be:
- Exact (integer sizes, no floating point)
- Stateless (safe to share across worker processes)
- Independent of cell order beyond the slice's own matrices
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Optional

from .errors import InvalidComplexError
from .lattice import CellComplex, CellIndex, cell_boundary, format_cell
from .zq_linalg import IntMatrix


@dataclass(frozen=True)
class ChainSlice:
    """Boundary maps around degree k: lower = d_k, upper = d_{k+1}.

    ``lower`` has one column per k-cell and ``upper`` one row per k-cell.
    """
    k: int
    lower: IntMatrix
    upper: IntMatrix
    indices: Optional[Dict[int, CellIndex]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.lower.cols != self.upper.rows:
            raise InvalidComplexError(
                f"Slice shapes disagree: d_k has {self.lower.cols} columns, "
                f"d_k+1 has {self.upper.rows} rows"
            )
        if self.lower.rows and self.upper.cols and not self.lower.matmul(self.upper).is_zero():
            raise InvalidComplexError(f"Boundary of boundary is nonzero in degree {self.k}")

    @property
    def n_cells(self) -> int:
        return self.lower.cols


def boundary_matrix(complex_: CellComplex, k: int) -> IntMatrix:
    """Signed incidence matrix d_k: one column per k-cell, rows are (k-1)-cells.

    Raises:
        InvalidComplexError: If a face of some k-cell is missing
    """
    columns = complex_.index(k)
    if k <= 0:
        return IntMatrix.zeros(0, len(columns))
    rows = complex_.index(k - 1)
    entries = []
    for col, cell in enumerate(columns):
        for face, sign in cell_boundary(cell).items():
            if face not in rows:
                raise InvalidComplexError(
                    f"Face {format_cell(face)} of {format_cell(cell)} is not in the complex"
                )
            entries.append((rows.id_of(face), col, sign))
    return IntMatrix(len(rows), len(columns), tuple(entries))


def chain_slice(complex_: CellComplex, k: int) -> ChainSlice:
    indices = {j: complex_.index(j) for j in (k - 1, k, k + 1) if j >= 0}
    return ChainSlice(
        k=k,
        lower=boundary_matrix(complex_, k),
        upper=boundary_matrix(complex_, k + 1),
        indices=indices,
    )


class HomologyRoute(ABC):
    """Interface for computing |H_k(X; Z_q)| from a chain slice."""

    name = "abstract"

    @abstractmethod
    def size_mod_q(self, slice_: ChainSlice, q: int) -> int:
        """Exact size of the degree-k (co)homology group with Z_q coefficients.

        Args:
            slice_: Boundary maps d_k and d_k+1
            q: Coefficient modulus, q >= 1

        Returns:
            The group size as a Python integer
        """
        pass
