"""Exact linear algebra over Z and Z_q.

Integer matrices are stored as sorted sparse triplets with Python integers.
Smith normal form runs on Python integers (no overflow). Howell form,
kernels and solving modulo q run on numpy int64 arrays with entries in
[0, q), which is exact for q < 2^31.
"""

from dataclasses import dataclass
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptySolutionSetError, InvalidModulusError

MAX_MODULUS = 2**31 - 1


# ============================================================
# Integer matrices
# ============================================================

@dataclass(frozen=True)
class IntMatrix:
    """Sparse integer matrix with canonical sorted (row, col, value) triplets."""
    rows: int
    cols: int
    entries: Tuple[Tuple[int, int, int], ...] = ()

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError(f"Negative shape ({self.rows}, {self.cols})")
        merged: Dict[Tuple[int, int], int] = {}
        for r, c, v in self.entries:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"Entry ({r}, {c}) outside shape ({self.rows}, {self.cols})")
            key = (int(r), int(c))
            merged[key] = merged.get(key, 0) + int(v)
        canonical = tuple(sorted((r, c, v) for (r, c), v in merged.items() if v))
        object.__setattr__(self, "entries", canonical)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple((k, k, 1) for k in range(n)))

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        rows = len(data)
        if cols is None:
            cols = len(data[0]) if rows else 0
        entries = tuple(
            (r, c, int(v)) for r, row in enumerate(data) for c, v in enumerate(row) if v
        )
        return cls(rows, cols, entries)

    @classmethod
    def from_columns(cls, columns: Sequence[Dict[int, int]], rows: int) -> "IntMatrix":
        entries = tuple((r, c, v) for c, col in enumerate(columns) for r, v in col.items())
        return cls(rows, len(columns), entries)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_dense(self) -> List[List[int]]:
        dense = [[0] * self.cols for _ in range(self.rows)]
        for r, c, v in self.entries:
            dense[r][c] = v
        return dense

    def to_array(self, q: int) -> np.ndarray:
        """Dense int64 array reduced into [0, q)."""
        arr = np.zeros((self.rows, self.cols), dtype=np.int64)
        for r, c, v in self.entries:
            arr[r, c] = v % q
        return arr

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple((c, r, v) for r, c, v in self.entries))

    def select_columns(self, indices: Sequence[int]) -> "IntMatrix":
        position = {c: k for k, c in enumerate(indices)}
        entries = tuple((r, position[c], v) for r, c, v in self.entries if c in position)
        return IntMatrix(self.rows, len(indices), entries)

    def select_rows(self, indices: Sequence[int]) -> "IntMatrix":
        return self.transpose().select_columns(indices).transpose()

    def matmul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"Shape mismatch {self.shape} @ {other.shape}")
        by_row: Dict[int, List[Tuple[int, int]]] = {}
        for r, c, v in other.entries:
            by_row.setdefault(r, []).append((c, v))
        out: Dict[Tuple[int, int], int] = {}
        for r, k, v in self.entries:
            for c, w in by_row.get(k, ()):
                out[(r, c)] = out.get((r, c), 0) + v * w
        return IntMatrix(self.rows, other.cols, tuple((r, c, v) for (r, c), v in out.items()))

    def matvec(self, x: Sequence[int]) -> List[int]:
        y = [0] * self.rows
        for r, c, v in self.entries:
            y[r] += v * int(x[c])
        return y

    def is_zero(self) -> bool:
        return not self.entries


def xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Extended Euclid: (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_s, s = s, old_s - quotient * s
        old_t, t = t, old_t - quotient * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _check_modulus(q: int) -> None:
    if not isinstance(q, (int, np.integer)) or q < 1:
        raise InvalidModulusError(f"Modulus must be a positive integer, got {q!r}")
    if q > MAX_MODULUS:
        raise InvalidModulusError(f"Modulus {q} exceeds {MAX_MODULUS}")


# ============================================================
# Smith normal form
# ============================================================

@dataclass(frozen=True)
class SnfResult:
    """Invariant factors d_1 | d_2 | ... of an integer matrix.

    When transforms are requested, ``left @ M @ right`` is diagonal with
    ``diagonal`` on its leading entries.
    """
    diagonal: Tuple[int, ...]
    shape: Tuple[int, int]
    left: Optional[Tuple[Tuple[int, ...], ...]] = None
    right: Optional[Tuple[Tuple[int, ...], ...]] = None

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    @property
    def torsion(self) -> Tuple[int, ...]:
        return tuple(v for v in self.diagonal if v > 1)


def smith_normal_form(M: IntMatrix, with_transforms: bool = False) -> SnfResult:
    """Smith normal form by smallest-magnitude pivoting over Python integers."""
    A = M.to_dense()
    m, n = M.rows, M.cols
    U = [[int(r == c) for c in range(m)] for r in range(m)] if with_transforms else None
    V = [[int(r == c) for c in range(n)] for r in range(n)] if with_transforms else None

    def swap_rows(a: int, b: int) -> None:
        A[a], A[b] = A[b], A[a]
        if U is not None:
            U[a], U[b] = U[b], U[a]

    def swap_cols(a: int, b: int) -> None:
        for row in A:
            row[a], row[b] = row[b], row[a]
        if V is not None:
            for row in V:
                row[a], row[b] = row[b], row[a]

    def add_row(dst: int, src: int, f: int) -> None:
        A[dst] = [x + f * y for x, y in zip(A[dst], A[src])]
        if U is not None:
            U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst: int, src: int, f: int) -> None:
        for row in A:
            row[dst] += f * row[src]
        if V is not None:
            for row in V:
                row[dst] += f * row[src]

    diagonal: List[int] = []
    t = 0
    while t < min(m, n):
        candidates = [
            (abs(A[r][c]), r, c) for r in range(t, m) for c in range(t, n) if A[r][c]
        ]
        if not candidates:
            break
        _, r0, c0 = min(candidates)
        swap_rows(t, r0)
        swap_cols(t, c0)
        while True:
            clean = True
            for r in range(t + 1, m):
                if A[r][t]:
                    add_row(r, t, -(A[r][t] // A[t][t]))
                    clean = clean and not A[r][t]
            for c in range(t + 1, n):
                if A[t][c]:
                    add_col(c, t, -(A[t][c] // A[t][t]))
                    clean = clean and not A[t][c]
            if not clean:
                # a remainder is smaller than the pivot: move it into place
                rest = [(abs(A[r][t]), r, t) for r in range(t + 1, m) if A[r][t]]
                rest += [(abs(A[t][c]), t, c) for c in range(t + 1, n) if A[t][c]]
                _, r1, c1 = min(rest)
                swap_rows(t, r1)
                swap_cols(t, c1)
                continue
            bad = next(
                (r for r in range(t + 1, m) for c in range(t + 1, n) if A[r][c] % A[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            if U is not None:
                U[t] = [-x for x in U[t]]
        diagonal.append(A[t][t])
        t += 1

    return SnfResult(
        diagonal=tuple(diagonal),
        shape=(m, n),
        left=tuple(tuple(row) for row in U) if U is not None else None,
        right=tuple(tuple(row) for row in V) if V is not None else None,
    )


# ============================================================
# Howell form over Z_q
# ============================================================

@dataclass(frozen=True)
class HowellForm:
    """Canonical echelon basis of a row span over Z_q.

    Row k has its leading entry ``pivots[k][1]`` (a divisor of q) in column
    ``pivots[k][0]``; pivot columns strictly increase. For every column c,
    the span elements vanishing before c are spanned by rows pivoting at
    or after c.
    """
    modulus: int
    rows: np.ndarray
    pivots: Tuple[Tuple[int, int], ...]

    @property
    def cols(self) -> int:
        return self.rows.shape[1]

    def span_size(self, from_col: int = 0) -> int:
        """Size of the submodule of span elements vanishing before ``from_col``."""
        size = 1
        for col, piv in self.pivots:
            if col >= from_col:
                size *= self.modulus // piv
        return size

    def reduce(self, vector: Sequence[int], stop_col: Optional[int] = None) -> np.ndarray:
        """Greedy reduction by rows whose pivot lies before ``stop_col``."""
        q = self.modulus
        v = np.asarray(vector, dtype=np.int64) % q
        for k, (col, piv) in enumerate(self.pivots):
            if stop_col is not None and col >= stop_col:
                break
            f = int(v[col]) // piv
            if f:
                v = (v - f * self.rows[k] % q) % q
        return v

    def contains(self, vector: Sequence[int]) -> bool:
        return not self.reduce(vector).any()


def _unit_normalizer(a: int, q: int) -> int:
    """Unit u of Z_q with u*a = gcd(a, q) (mod q)."""
    g = gcd(a, q)
    m = q // g
    u = pow(a // g, -1, m) if m > 1 else 1
    while gcd(u, q) != 1:
        u += m
    return u


def _howell_array(A: np.ndarray, q: int) -> Tuple[np.ndarray, Tuple[Tuple[int, int], ...]]:
    A = A.copy() % q
    n_cols = A.shape[1]
    if q == 1 or A.shape[0] == 0:
        return np.zeros((0, n_cols), dtype=np.int64), ()
    pivots: List[Tuple[int, int]] = []
    r = 0
    for c in range(n_cols):
        found = False
        while True:
            nz = r + np.flatnonzero(A[r:, c])
            if nz.size == 0:
                break
            found = True
            k = int(nz[np.argmin(np.gcd(A[nz, c], q))])
            if k != r:
                A[[r, k]] = A[[k, r]]
            u = _unit_normalizer(int(A[r, c]), q)
            if u != 1:
                A[r] = A[r] * u % q
            g = int(A[r, c])
            below = r + 1 + np.flatnonzero(A[r + 1:, c])
            if below.size == 0:
                break
            col = A[below, c]
            divisible = col % g == 0
            if divisible.any():
                idx = below[divisible]
                A[idx] = (A[idx] - np.outer(col[divisible] // g, A[r]) % q) % q
            rest = below[~divisible]
            if rest.size == 0:
                break
            for k in rest:
                a, b = int(A[r, c]), int(A[k, c])
                h, s, t = xgcd(a, b)
                top = (s % q * A[r] % q + t % q * A[k] % q) % q
                bottom = ((-b // h) % q * A[r] % q + (a // h) % q * A[k] % q) % q
                A[r], A[k] = top, bottom
        if not found:
            continue
        p = int(A[r, c])
        if r:
            f = A[:r, c] // p
            if f.any():
                A[:r] = (A[:r] - np.outer(f, A[r]) % q) % q
        annihilated = (q // p) * A[r] % q
        if annihilated.any():
            A = np.vstack([A, annihilated[None, :]])
        pivots.append((c, p))
        r += 1
    return A[:r].copy(), tuple(pivots)


def howell_form(M, q: int) -> HowellForm:
    """Howell normal form of the row span of M over Z_q.

    Args:
        M: IntMatrix or 2-D integer array
        q: Modulus, q >= 1

    Raises:
        InvalidModulusError: If q < 1
    """
    _check_modulus(q)
    A = M.to_array(q) if isinstance(M, IntMatrix) else np.asarray(M, dtype=np.int64) % q
    if A.ndim != 2:
        raise ValueError("howell_form expects a 2-D matrix")
    rows, pivots = _howell_array(A, q)
    return HowellForm(modulus=int(q), rows=rows, pivots=pivots)


# ============================================================
# Kernels, images, solving
# ============================================================

@dataclass(frozen=True)
class ModuleMapSummary:
    """Kernel and image data of x -> Mx over Z_q.

    ``kernel_basis[k]`` has additive order ``kernel_orders[k]``; every kernel
    element is uniquely sum_k c_k * kernel_basis[k] with 0 <= c_k < order_k.
    """
    modulus: int
    kernel_basis: np.ndarray
    kernel_orders: Tuple[int, ...]
    kernel_size: int
    image_size: int


def _augmented_howell(M: IntMatrix, q: int) -> HowellForm:
    A = np.hstack([M.transpose().to_array(q), np.eye(M.cols, dtype=np.int64) % q])
    return howell_form(A, q)


def kernel_mod(M: IntMatrix, q: int) -> ModuleMapSummary:
    """Kernel generators and exact kernel/image sizes of M over Z_q."""
    _check_modulus(q)
    H = _augmented_howell(M, q)
    split = M.rows
    keep = [k for k, (col, _) in enumerate(H.pivots) if col >= split]
    basis = H.rows[keep, split:] if keep else np.zeros((0, M.cols), dtype=np.int64)
    orders = tuple(q // H.pivots[k][1] for k in keep)
    kernel_size = 1
    for o in orders:
        kernel_size *= o
    return ModuleMapSummary(
        modulus=int(q),
        kernel_basis=basis,
        kernel_orders=orders,
        kernel_size=kernel_size,
        image_size=int(q) ** M.cols // kernel_size,
    )


def image_size_mod(M: IntMatrix, q: int) -> int:
    """|im M| over Z_q, from the Howell form of the column span."""
    return howell_form(M.transpose(), q).span_size()


def solve_mod(M: IntMatrix, b: Sequence[int], q: int) -> Optional[np.ndarray]:
    """One x with Mx = b (mod q), or None when the system is unsolvable."""
    _check_modulus(q)
    if len(b) != M.rows:
        raise ValueError(f"Right-hand side has length {len(b)}, expected {M.rows}")
    if q == 1:
        return np.zeros(M.cols, dtype=np.int64)
    H = _augmented_howell(M, q)
    target = np.concatenate([np.asarray(b, dtype=np.int64) % q, np.zeros(M.cols, dtype=np.int64)])
    residual = H.reduce(target, stop_col=M.rows)
    if residual[:M.rows].any():
        return None
    return (-residual[M.rows:]) % q


def uniform_solution_sample(
    M: IntMatrix,
    b: Sequence[int],
    q: int,
    rng: np.random.Generator,
    kernel: Optional[ModuleMapSummary] = None,
) -> np.ndarray:
    """Uniform draw from {x : Mx = b (mod q)}.

    A particular solution is shifted by sum_k c_k * basis_k with each c_k
    uniform on [0, order_k); the Howell basis makes this map a bijection
    onto the kernel, so the draw is exactly uniform.

    Raises:
        EmptySolutionSetError: If the system has no solution
    """
    x0 = solve_mod(M, b, q)
    if x0 is None:
        raise EmptySolutionSetError(f"No solution of the {M.rows}x{M.cols} system mod {q}")
    summary = kernel if kernel is not None else kernel_mod(M, q)
    if not summary.kernel_orders:
        return x0
    coeffs = rng.integers(0, np.asarray(summary.kernel_orders, dtype=np.int64))
    return (x0 + (coeffs[:, None] * summary.kernel_basis % q).sum(axis=0)) % q

