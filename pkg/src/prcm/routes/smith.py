"""Integral homology via Smith normal form and universal coefficients."""

from math import gcd
from typing import Tuple

from ..chains import ChainSlice, HomologyRoute
from ..zq_linalg import smith_normal_form


class SmithRoute(HomologyRoute):
    """H_k(Z_q) = H_k(Z) (x) Z_q  +  Tor(H_k-1(Z), Z_q).

    With H_k(Z) = Z^b_k + T_k, the size is q^b_k * prod gcd(t, q) over the
    torsion factors of d_k+1 (for T_k) and of d_k (for T_k-1).
    """

    name = "smith"

    def integral(self, slice_: ChainSlice) -> Tuple[int, Tuple[int, ...], Tuple[int, ...]]:
        """Return (b_k, torsion of H_k, torsion of H_k-1) over Z."""
        lower = smith_normal_form(slice_.lower)
        upper = smith_normal_form(slice_.upper)
        betti = slice_.n_cells - lower.rank - upper.rank
        return betti, upper.torsion, lower.torsion

    def size_mod_q(self, slice_: ChainSlice, q: int) -> int:
        betti, torsion, lower_torsion = self.integral(slice_)
        size = q ** betti
        for t in torsion + lower_torsion:
            size *= gcd(t, q)
        return size
