"""Exact integer and p-adic linear algebra.

Smith normal form over Z with arbitrary-precision integers, elementary-divisor
p-valuations of square matrices mod p**N, and a block-aware streaming
eliminator for block lower triangular inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "IntMatrix",
    "PadicMatrix",
    "DivisorValuations",
    "CokernelPartition",
    "BlockStructureError",
    "snf_diagonal",
    "cokernel_partition",
    "padic_valuations",
    "streaming_block_eliminate",
    "reduce_matrix",
]


class BlockStructureError(ValueError):
    """A block claimed by the lower triangular layout is above the diagonal."""


@dataclass(frozen=True)
class IntMatrix:
    """Dense matrix of Python ints, row-major."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError("matrix dimensions must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match rows*cols")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        r = len(rows)
        c = len(rows[0])
        flat = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            flat.extend(int(x) for x in row)
        return cls(r, c, tuple(flat))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def to_rows(self) -> list[list[int]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]


def _int64_safe(p: int, precision: int, dim: int) -> bool:
    # Every intermediate is a dot product of at most `dim` terms, each a
    # product of two residues below q = p**precision.
    q = p ** precision
    return dim * (q - 1) * (q - 1) < 2 ** 62


def residue_dtype(p: int, precision: int, dim: int):
    """Array dtype for residues mod p**precision with `dim`-length dots.

    int64 when every intermediate fits exactly; for p = 2 with precision up
    to 63, uint64 with C wraparound semantics (truncation mod 2**64 commutes
    with reduction mod 2**precision, since the latter divides the former);
    Python ints otherwise.
    """
    if _int64_safe(p, precision, dim):
        return np.int64
    if p == 2 and precision <= 63:
        return np.uint64
    return object


class PadicMatrix:
    """Matrix of residues mod p**precision.

    Entries live in [0, p**precision).  Backed by an int64 or wraparound
    uint64 ndarray when the elimination's intermediates allow it, by an
    object ndarray of Python ints otherwise.
    """

    __slots__ = ("rows", "cols", "p", "precision", "data")

    def __init__(self, data, p: int, precision: int):
        if precision < 1:
            raise ValueError("precision must be >= 1")
        arr = np.asarray(data)
        if arr.ndim != 2:
            raise ValueError("need a 2-D array")
        q = p ** precision
        check = arr.astype(object) if (arr.dtype != object and q > np.iinfo(np.int64).max) else arr
        if not ((check >= 0) & (check < q)).all():
            raise ValueError("entries must lie in [0, p**precision)")
        arr = arr.astype(residue_dtype(p, precision, max(arr.shape)), copy=True)
        arr.setflags(write=False)
        self.rows, self.cols = arr.shape
        self.p = p
        self.precision = precision
        self.data = arr

    @property
    def modulus(self) -> int:
        return self.p ** self.precision

    def to_int_matrix(self) -> IntMatrix:
        return IntMatrix.from_rows([[int(x) for x in row] for row in self.data])

    def __eq__(self, other):
        return (
            isinstance(other, PadicMatrix)
            and self.p == other.p
            and self.precision == other.precision
            and self.data.shape == other.data.shape
            and bool((self.data == other.data).all())
        )

    def __repr__(self):
        return f"PadicMatrix({self.rows}x{self.cols}, p={self.p}, N={self.precision})"


def reduce_matrix(m: IntMatrix, p: int, precision: int) -> PadicMatrix:
    """Reduce an integer matrix entrywise mod p**precision."""
    q = p ** precision
    rows = [[x % q for x in row] for row in m.to_rows()]
    return PadicMatrix(np.array(rows, dtype=object), p, precision)


@dataclass(frozen=True)
class DivisorValuations:
    """p-valuations of the elementary divisors resolvable at the working
    precision, plus the count of diagonal positions that vanished mod p**N."""

    valuations: tuple[int, ...]
    saturated_count: int

    def partition(self) -> tuple[int, ...]:
        """Positive valuations, weakly decreasing: the cokernel's p-type."""
        return tuple(sorted((v for v in self.valuations if v > 0), reverse=True))


class CokernelPartition(NamedTuple):
    partition: tuple[int, ...]
    free_rank: int


# ---------------------------------------------------------------------------
# Exact Smith normal form
# ---------------------------------------------------------------------------

def snf_diagonal(m: IntMatrix) -> list[int]:
    """Diagonal of the Smith normal form of an integer matrix.

    Returns d_1 | d_2 | ... | d_r with r = min(rows, cols), all nonnegative,
    zeros last.  Pivot choice: nonzero entry of minimal absolute value,
    reduced by gcd steps, which keeps coefficient growth tolerable at the
    sizes this library targets (n <= 64 exact).
    """
    a = m.to_rows()
    nrows, ncols = m.rows, m.cols
    diag: list[int] = []
    t = 0
    while t < min(nrows, ncols):
        pos = _min_abs_nonzero(a, t, nrows, ncols)
        if pos is None:
            break
        i, j = pos
        if i != t:
            a[i], a[t] = a[t], a[i]
        if j != t:
            for row in a:
                row[j], row[t] = row[t], row[j]
        _isolate_pivot(a, t, nrows, ncols)
        diag.append(a[t][t])
        t += 1
    diag.extend([0] * (min(nrows, ncols) - len(diag)))
    return diag


def _min_abs_nonzero(a, t, nrows, ncols):
    best = None
    best_abs = None
    for i in range(t, nrows):
        row = a[i]
        for j in range(t, ncols):
            e = row[j]
            if e:
                if best_abs is None or abs(e) < best_abs:
                    best = (i, j)
                    best_abs = abs(e)
                    if best_abs == 1:
                        return best
    return best


def _isolate_pivot(a, t, nrows, ncols):
    """Drive row/column t to (pivot, 0, ..., 0) with the pivot dividing every
    entry of the trailing submatrix."""
    while True:
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
        piv = a[t][t]

        # Euclidean steps in column t until the pivot divides everything below.
        moved = False
        for i in range(t + 1, nrows):
            if a[i][t] % piv:
                q = a[i][t] // piv
                a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                a[i], a[t] = a[t], a[i]  # remainder is smaller: new pivot
                moved = True
                break
        if moved:
            continue
        for i in range(t + 1, nrows):
            if a[i][t]:
                q = a[i][t] // piv
                a[i] = [x - q * y for x, y in zip(a[i], a[t])]

        # Same along row t; column ops only touch row t since column t is clear.
        moved = False
        for j in range(t + 1, ncols):
            if a[t][j] % piv:
                q = a[t][j] // piv
                for row in a:
                    row[j] -= q * row[t]
                for row in a:
                    row[j], row[t] = row[t], row[j]
                moved = True
                break
        if moved:
            continue
        for j in range(t + 1, ncols):
            if a[t][j]:
                q = a[t][j] // piv
                for row in a:
                    row[j] -= q * row[t]

        # Divisibility: the pivot must divide the whole trailing block.
        bad = None
        for i in range(t + 1, nrows):
            row = a[i]
            for j in range(t + 1, ncols):
                if row[j] % piv:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is None:
            return
        a[t] = [x + y for x, y in zip(a[t], a[bad])]


def det_bareiss(m: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant needs a square matrix")
    a = m.to_rows()
    n = m.rows
    sign = 1
    prev = 1
    for t in range(n):
        if a[t][t] == 0:
            swap = next((i for i in range(t + 1, n) if a[i][t]), None)
            if swap is None:
                return 0
            a[t], a[swap] = a[swap], a[t]
            sign = -sign
        for i in range(t + 1, n):
            for j in range(t + 1, n):
                a[i][j] = (a[i][j] * a[t][t] - a[i][t] * a[t][j]) // prev
            a[i][t] = 0
        prev = a[t][t]
    return sign * a[n - 1][n - 1]


def rational_rank(m: IntMatrix) -> int:
    """Rank over Q by fraction-free elimination with full pivoting."""
    a = m.to_rows()
    nrows, ncols = m.rows, m.cols
    prev = 1
    rank = 0
    for t in range(min(nrows, ncols)):
        pos = next(
            ((i, j) for i in range(t, nrows) for j in range(t, ncols) if a[i][j]),
            None,
        )
        if pos is None:
            break
        i, j = pos
        if i != t:
            a[i], a[t] = a[t], a[i]
        if j != t:
            for row in a:
                row[j], row[t] = row[t], row[j]
        for r in range(t + 1, nrows):
            for c in range(t + 1, ncols):
                a[r][c] = (a[r][c] * a[t][t] - a[r][t] * a[t][c]) // prev
            a[r][t] = 0
        prev = a[t][t]
        rank += 1
    return rank


def cokernel_partition(m: IntMatrix, p: int) -> CokernelPartition:
    """Type of the Sylow p-subgroup of cok(m) for square m, with the free rank
    (count of zero elementary divisors) reported alongside."""
    if m.rows != m.cols:
        raise ValueError("cokernel_partition expects a square matrix")
    diag = snf_diagonal(m)
    free = sum(1 for d in diag if d == 0)
    vals = []
    for d in diag:
        if d == 0:
            continue
        v = 0
        while d % p == 0:
            d //= p
            v += 1
        if v:
            vals.append(v)
    return CokernelPartition(tuple(sorted(vals, reverse=True)), free)


# ---------------------------------------------------------------------------
# Valuation-aware elimination mod p**N
# ---------------------------------------------------------------------------

def _min_valuation(sub, p, precision):
    """(v, (i, j)) for the first entry of minimal p-valuation in row-major
    order, or (None, None) when the block vanishes mod p**precision."""
    units = (sub % p) != 0
    if units.any():
        flat = int(np.argmax(units))
        return 0, divmod(flat, sub.shape[1])
    if not sub.any():
        return None, None
    s = sub // p
    v = 1
    while v < precision:
        units = (s % p) != 0
        if units.any():
            flat = int(np.argmax(units))
            return v, divmod(flat, s.shape[1])
        s = s // p
        v += 1
    return None, None


def _eliminate(a, p, precision):
    """Two-sided elimination of a writable square array mod q = p**precision.

    Pivot = entry of minimal p-valuation; its row and column are cleared by
    exact unit-scaled subtractions, so the trailing block stays equal to the
    integer Schur complement mod q.  Returns (sorted valuations, saturated).
    """
    n = a.shape[0]
    q = p ** precision
    vals: list[int] = []
    for t in range(n):
        v, pos = _min_valuation(a[t:, t:], p, precision)
        if v is None:
            return tuple(sorted(vals)), n - t
        i, j = pos[0] + t, pos[1] + t
        if i != t:
            a[[t, i], :] = a[[i, t], :]
        if j != t:
            a[:, [t, j]] = a[:, [j, t]]
        pv = p ** v
        m = q // pv
        unit = int(a[t, t]) // pv
        uinv = pow(unit % m, -1, m)
        col = a[t + 1:, t]
        if col.size:
            f = ((col // pv) * uinv) % m
            a[t + 1:, t:] = (a[t + 1:, t:] - np.outer(f, a[t, t:])) % q
        # Column ops clearing row t only touch row t now that column t is clear.
        a[t, t + 1:] = 0
        vals.append(v)
    return tuple(sorted(vals)), 0


def padic_valuations(m: PadicMatrix) -> DivisorValuations:
    """Elementary-divisor p-valuations of a square matrix mod p**precision.

    Valuations below the precision are exact for any integer lift; positions
    whose residual block vanished mod p**precision are only known to carry
    valuation >= precision and are counted as saturated.
    """
    if m.rows != m.cols:
        raise ValueError("padic_valuations expects a square matrix")
    work = m.data.copy()
    work.setflags(write=True)
    vals, sat = _eliminate(work, m.p, m.precision)
    return DivisorValuations(vals, sat)


# ---------------------------------------------------------------------------
# Streaming elimination for block lower triangular matrices
# ---------------------------------------------------------------------------

def streaming_block_eliminate(m: PadicMatrix, block_sizes: Sequence[int]) -> DivisorValuations:
    """padic_valuations for a block lower triangular matrix, one block row at
    a time.

    Block row i may be nonzero only in block columns j <= i (diagonal,
    subdiagonal, and strictly-lower fill).  Unit pivots are finalized as they
    appear, so only a small carry of unit-free rows survives to the final
    dense elimination; for random balanced diagonal blocks the carry stays
    near the block size, giving roughly O(k * max(n_i)**3) scalar work.
    Output is identical to padic_valuations on the assembled matrix.
    """
    sizes = [int(s) for s in block_sizes]
    if any(s <= 0 for s in sizes):
        raise ValueError("block sizes must be positive")
    n = sum(sizes)
    if m.rows != n or m.cols != n:
        raise ValueError("block sizes do not tile the matrix")
    k = len(sizes)
    offsets = [0]
    for s in sizes:
        offsets.append(offsets[-1] + s)

    for i in range(k):
        r0, r1 = offsets[i], offsets[i + 1]
        if r1 < n and (m.data[r0:r1, r1:] != 0).any():
            raise BlockStructureError(
                f"block row {i + 1} has a nonzero block above the diagonal"
            )

    p = m.p
    precision = m.precision
    q = p ** precision
    dtype = m.data.dtype

    active: list[int] = []      # global ids of columns without a unit pivot
    consumed: list[int] = []    # global ids of columns consumed, pivot order
    carry = np.zeros((0, 0), dtype=dtype)
    pivot_rows = np.zeros((0, 0), dtype=dtype)  # coefficients on active cols
    unit_pivots = 0

    for i in range(k):
        r0, r1 = offsets[i], offsets[i + 1]
        new_cols = list(range(r0, r1))
        carry = np.hstack([carry, np.zeros((carry.shape[0], len(new_cols)), dtype=dtype)])
        pivot_rows = np.hstack([pivot_rows, np.zeros((pivot_rows.shape[0], len(new_cols)), dtype=dtype)])
        active.extend(new_cols)

        block = np.array(m.data[r0:r1, :r1], dtype=dtype)
        y = block[:, active]
        if consumed:
            x = block[:, consumed]
            y = (y - np.dot(x, pivot_rows)) % q
        carry = np.vstack([carry, y])

        carry, pivot_rows, finalized = _finalize_units(
            carry, pivot_rows, active, consumed, p, q
        )
        unit_pivots += finalized

    if carry.shape[0] != carry.shape[1]:
        raise AssertionError("carry must be square after the last block row")
    if carry.shape[0]:
        vals, sat = _eliminate(carry, p, precision)
    else:
        vals, sat = (), 0
    return DivisorValuations(tuple(sorted((0,) * unit_pivots + vals)), sat)


def _finalize_units(carry, pivot_rows, active, consumed, p, q):
    """Split off unit pivots from the carry until none remain.

    Each finalization removes one carry row and one active column, keeping
    every stored row reduced to zero on all consumed columns (Gauss-Jordan
    maintenance), so arriving rows need a single reduction pass.
    """
    finalized = 0
    while carry.shape[0]:
        units = (carry % p) != 0
        if not units.any():
            break
        flat = int(np.argmax(units))
        r, c = divmod(flat, carry.shape[1])
        uinv = pow(int(carry[r, c]), -1, q)
        pivrow = (carry[r] * uinv) % q
        colv = carry[:, c].copy()
        colv[r] = 0
        carry = (carry - np.outer(colv, pivrow)) % q
        if pivot_rows.shape[0]:
            pivot_rows = (pivot_rows - np.outer(pivot_rows[:, c], pivrow)) % q
        carry = np.delete(np.delete(carry, r, axis=0), c, axis=1)
        pivot_rows = np.delete(pivot_rows, c, axis=1)
        pivot_rows = np.vstack([pivot_rows, np.delete(pivrow, c)[None, :]])
        consumed.append(active.pop(c))
        finalized += 1
    return carry, pivot_rows, finalized
