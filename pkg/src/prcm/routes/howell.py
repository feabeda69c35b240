"""Direct homology over Z_q via Howell forms."""

from ..chains import ChainSlice, HomologyRoute
from ..zq_linalg import image_size_mod, kernel_mod


class HowellRoute(HomologyRoute):
    """|H_k| = |ker d_k| / |im d_k+1|, both computed modulo q."""

    name = "howell"

    def size_mod_q(self, slice_: ChainSlice, q: int) -> int:
        cycles = kernel_mod(slice_.lower, q).kernel_size
        boundaries = image_size_mod(slice_.upper, q)
        return cycles // boundaries
