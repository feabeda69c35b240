"""Cohomology over Z_q through coboundary matrices."""

from ..chains import ChainSlice, HomologyRoute
from ..zq_linalg import image_size_mod, kernel_mod


class CochainRoute(HomologyRoute):
    """|H^k| = |ker delta_k| / |im delta_k-1| with delta_k = transpose(d_k+1)."""

    name = "cochain"

    def size_mod_q(self, slice_: ChainSlice, q: int) -> int:
        cocycles = kernel_mod(slice_.upper.transpose(), q).kernel_size
        coboundaries = image_size_mod(slice_.lower.transpose(), q)
        return cocycles // coboundaries
