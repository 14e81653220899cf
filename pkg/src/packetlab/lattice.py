"""Exact integer arithmetic on lattices Z^d / M Z^d for expanding dilation matrices.

Every coset computation here is exact: membership tests and digit extraction
go through the integer adjugate and determinant of M (Bareiss elimination),
never through floating point.  The residue key

    key(v) = (adj(M) @ v) mod |det M|

is a bijection between cosets of M Z^d and its value set, because
adj(M) M = det(M) I.
"""

import itertools
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    InternalInconsistencyError,
    NonSquareError,
    NotExpandingError,
    SingularOrUnitError,
    SizeOverflowError,
)

DEFAULT_MAX_CELLS = 2**24
EXPANDING_TOL = 1e-9

__all__ = [
    "DilationMatrix",
    "DigitSet",
    "validate_dilation",
    "digit_set",
    "digit_of",
    "enumerate_representatives",
    "reduce_mod",
    "character_sum",
    "max_cells",
]


def max_cells() -> int:
    """Cell budget for quotient-lattice enumeration (PACKETLAB_MAX_CELLS overrides)."""
    raw = os.environ.get("PACKETLAB_MAX_CELLS")
    if raw is None:
        return DEFAULT_MAX_CELLS
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"PACKETLAB_MAX_CELLS is not an integer: {raw!r}") from exc
    if value < 1:
        raise ValueError("PACKETLAB_MAX_CELLS must be positive")
    return value


def _det_int(rows: list[list[int]]) -> int:
    """Determinant of an integer matrix by fraction-free Bareiss elimination."""
    a = [row[:] for row in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[-1][-1]


def _adjugate_int(rows: list[list[int]]) -> list[list[int]]:
    """Adjugate (transposed cofactor matrix), exact over Z."""
    n = len(rows)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(rows) if k != i]
            adj[j][i] = (-1) ** (i + j) * _det_int(minor)
    return adj


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class DilationMatrix:
    """Validated integer expanding matrix A, with B = A^t and |det A|.

    Raises NonSquareError, SingularOrUnitError, or NotExpandingError when the
    input is not a square integer matrix with |det| >= 2 and all eigenvalue
    moduli > 1 (tolerance 1e-9).
    """

    def __init__(self, entries):
        arr = np.asarray(entries)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise NonSquareError(f"expected a square matrix, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            rounded = np.round(arr)
            if not np.all(np.isfinite(arr)) or np.any(arr != rounded):
                raise NonSquareError("matrix entries must be integers")
            arr = rounded
        rows = [[int(x) for x in row] for row in arr]
        det = _det_int(rows)
        if abs(det) <= 1:
            raise SingularOrUnitError(f"|det| = {abs(det)}, need at least 2")
        eigs = np.linalg.eigvals(np.array(rows, dtype=float))
        small = np.min(np.abs(eigs))
        if small <= 1.0 + EXPANDING_TOL:
            raise NotExpandingError(f"eigenvalue modulus {small:.6g} is not > 1")

        self.dim = len(rows)
        self.det = det
        self.det_abs = abs(det)
        self.A = _frozen(np.array(rows, dtype=np.int64))
        self.B = _frozen(self.A.T.copy())
        self._adj_A = _frozen(np.array(_adjugate_int(rows), dtype=np.int64))
        rows_b = [list(col) for col in zip(*rows)]
        self._adj_B = _frozen(np.array(_adjugate_int(rows_b), dtype=np.int64))
        # adj(M) M = det I is the exactness guarantee everything else rests on
        if not np.array_equal(self._adj_A @ self.A, det * np.eye(self.dim, dtype=np.int64)):
            raise InternalInconsistencyError("adjugate identity failed")

    def side(self, for_transpose: bool) -> np.ndarray:
        return self.B if for_transpose else self.A

    def adjugate(self, for_transpose: bool) -> np.ndarray:
        return self._adj_B if for_transpose else self._adj_A

    def inverse_float(self, for_transpose: bool = False) -> np.ndarray:
        return self.adjugate(for_transpose).astype(float) / float(self.det)

    def key(self) -> tuple:
        return (self.dim, tuple(map(tuple, self.A.tolist())))

    def __eq__(self, other):
        return isinstance(other, DilationMatrix) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"DilationMatrix({self.A.tolist()!r})"


def validate_dilation(entries) -> DilationMatrix:
    """Validate a square integer matrix and wrap it as a DilationMatrix."""
    return DilationMatrix(entries)


def _box_iter(dim: int, half: int):
    # first coordinate varies fastest; matches the persisted digit ordering
    for tail in itertools.product(range(-half, half + 1), repeat=dim):
        yield tuple(reversed(tail))


@dataclass(frozen=True)
class DigitSet:
    """Ordered coset representatives of M Z^d in Z^d, zero first.

    M is matrix.A when for_transpose is False, matrix.B otherwise.  The digit
    order is part of the object's identity: packet indexing and polyphase
    block order are defined relative to it.
    """

    matrix: DilationMatrix
    for_transpose: bool
    digits: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = self.matrix
        a = m.det_abs
        if len(self.digits) != a:
            raise ValueError(f"need exactly {a} digits, got {len(self.digits)}")
        if any(len(v) != m.dim for v in self.digits):
            raise ValueError("digit dimension mismatch")
        if self.digits[0] != (0,) * m.dim:
            raise ValueError("first digit must be the zero vector")
        adj = m.adjugate(self.for_transpose)
        lookup = {}
        for idx, vec in enumerate(self.digits):
            key = tuple(int(x) % a for x in adj @ np.array(vec, dtype=np.int64))
            if key in lookup:
                raise ValueError(f"digits {self.digits[lookup[key]]} and {vec} share a coset")
            lookup[key] = idx
        object.__setattr__(self, "_residue_index", lookup)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.digits, dtype=np.int64)

    def key(self) -> tuple:
        return (self.matrix.key(), self.for_transpose, self.digits)

    @classmethod
    def from_vectors(cls, matrix: DilationMatrix, for_transpose: bool, vectors) -> "DigitSet":
        """Build from unordered representatives; the zero vector is moved to front."""
        vecs = [tuple(int(x) for x in v) for v in vectors]
        zero = (0,) * matrix.dim
        if zero not in vecs:
            raise ValueError("digit set must contain the zero vector")
        ordered = [zero] + [v for v in vecs if v != zero]
        return cls(matrix, for_transpose, tuple(ordered))


def digit_set(matrix: DilationMatrix, for_transpose: bool = False) -> DigitSet:
    """Enumerate a full digit set for A (or B = A^t), zero first.

    Scans the integer box of half-width |det| * ||M||_inf, keeps the first
    representative seen for each coset, then translates so the zero coset is
    represented by 0.  The box provably contains a representative of every
    coset: v - M round(M^-1 v) has sup-norm at most ||M||_inf / 2.
    """
    m = matrix.side(for_transpose)
    adj = matrix.adjugate(for_transpose)
    a = matrix.det_abs
    half = a * int(np.abs(m).sum(axis=1).max())
    found: dict[tuple, tuple] = {}
    for vec in _box_iter(matrix.dim, half):
        key = tuple(int(x) % a for x in adj @ np.array(vec, dtype=np.int64))
        if key not in found:
            found[key] = vec
            if len(found) == a:
                break
    if len(found) != a:
        raise InternalInconsistencyError("digit scan exhausted its box")
    zero_key = (0,) * matrix.dim
    base = np.array(found[zero_key], dtype=np.int64)
    ordered = [(0,) * matrix.dim]
    for key, vec in found.items():
        if key != zero_key:
            ordered.append(tuple(int(x) for x in np.array(vec, dtype=np.int64) - base))
    return DigitSet(matrix, for_transpose, tuple(ordered))


def _as_vec(k, dim: int) -> np.ndarray:
    arr = np.asarray(k, dtype=np.int64).reshape(-1)
    if arr.shape != (dim,):
        raise ValueError(f"expected an integer vector of length {dim}")
    return arr


def digit_of(k, ds: DigitSet) -> tuple[int, np.ndarray]:
    """Unique (r, q) with k = digit[r] + M q; exact."""
    m = ds.matrix
    vec = _as_vec(k, m.dim)
    adj = m.adjugate(ds.for_transpose)
    a = m.det_abs
    key = tuple(int(x) % a for x in adj @ vec)
    try:
        r = ds._residue_index[key]
    except KeyError as exc:
        raise InternalInconsistencyError("residue table does not cover this coset") from exc
    num = adj @ (vec - np.array(ds.digits[r], dtype=np.int64))
    q, rem = np.divmod(num, m.det)
    if np.any(rem != 0):
        raise InternalInconsistencyError("inexact coset division")
    return r, q


def digit_indices(points: np.ndarray, ds: DigitSet) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized digit_of over rows of an (n, d) int array."""
    m = ds.matrix
    adj = m.adjugate(ds.for_transpose)
    a = m.det_abs
    pts = np.asarray(points, dtype=np.int64)
    keys = (pts @ adj.T) % a
    powers = a ** np.arange(m.dim, dtype=np.int64)
    enc = keys @ powers
    table = np.full(int(a**m.dim), -1, dtype=np.int64)
    for digit_key, idx in ds._residue_index.items():
        table[int(np.dot(np.array(digit_key, dtype=np.int64), powers))] = idx
    r = table[enc]
    if np.any(r < 0):
        raise InternalInconsistencyError("residue table does not cover some coset")
    shifted = pts - ds.array[r]
    num = shifted @ adj.T
    q, rem = np.divmod(num, m.det)
    if np.any(rem != 0):
        raise InternalInconsistencyError("inexact coset division")
    return r, q


def enumerate_representatives(matrix: DilationMatrix, ds: DigitSet, level: int) -> np.ndarray:
    """Representatives of Z^d / M^level Z^d as an (a^level, d) int array.

    Row m is sum_i M^i digits[d_i] where (d_i) are the base-a digits of m,
    least significant first.  Raises SizeOverflowError past the cell budget.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    a = matrix.det_abs
    count = a**level
    if count > max_cells():
        raise SizeOverflowError(f"a^level = {count} exceeds the cell limit {max_cells()}")
    m = matrix.side(ds.for_transpose)
    reps = np.zeros((1, matrix.dim), dtype=np.int64)
    power = np.eye(matrix.dim, dtype=np.int64)
    for _ in range(level):
        shifts = ds.array @ power.T
        # flat index s * a^i + old: the new digit is the more significant axis
        reps = (reps[None, :, :] + shifts[:, None, :]).reshape(-1, matrix.dim)
        power = power @ m
    return reps


def reduce_mod_many(points: np.ndarray, level: int, ds: DigitSet) -> np.ndarray:
    """Vectorized reduce_mod over rows; returns int64 indices in [0, a^level)."""
    a = ds.matrix.det_abs
    pts = np.asarray(points, dtype=np.int64)
    idx = np.zeros(pts.shape[0], dtype=np.int64)
    scale = 1
    for _ in range(level):
        r, pts = digit_indices(pts, ds)
        idx += scale * r
        scale *= a
    return idx


def reduce_mod(k, level: int, matrix: DilationMatrix, ds: DigitSet) -> int:
    """Index of the representative congruent to k modulo M^level Z^d."""
    if level < 0:
        raise ValueError("level must be >= 0")
    vec = _as_vec(k, matrix.dim)
    return int(reduce_mod_many(vec[None, :], level, ds)[0])


def unit_phase(num: int, den: int) -> complex:
    """exp(-2 pi i num/den), exact at quarter turns so cancellations are clean."""
    if den < 0:
        num, den = -num, -den
    num %= den
    q, r = divmod(4 * num, den)
    if r == 0:
        return (1 + 0j, -1j, -1 + 0j, 1j)[q % 4]
    return complex(np.exp(-2j * np.pi * (num / den)))


def character_sum(nu, matrix: DilationMatrix, digits_b: DigitSet) -> complex:
    """sum over mu in K_B of exp(-2 pi i <B^-1 mu, nu>) for integer nu.

    Equals |det A| when nu is in A Z^d and 0 otherwise; the exponents are
    rational, evaluated exactly before the complex exponential.
    """
    m = matrix
    vec = _as_vec(nu, m.dim)
    adj = m.adjugate(True)
    total = 0.0 + 0.0j
    for mu in digits_b.digits:
        num = int(np.dot(adj @ np.array(mu, dtype=np.int64), vec))
        total += unit_phase(num, m.det)
    return complex(total)
