"""Matrix filter banks over a dilation matrix: symbols, splitting checks, completion.

A bank holds up to a = |det A| channels of L x L tap arrays.  The symbol of
channel r is

    h^r_lj(xi) = a^(-1/2) sum_k h^r_ljk exp(-i <xi, k>)

with the normalization inside the symbol, not the stored taps.  A bank splits
a space orthonormally exactly when the stacked aL x aL matrix of shifted
symbols is unitary for every xi; check_splitting_exact tests the equivalent
tap-domain correlation identity and is exact up to float rounding.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ChannelOutOfRangeError,
    InternalInconsistencyError,
    LowPassNotIsometricError,
    NotUnitaryError,
)
from .lattice import DigitSet, DilationMatrix, digit_of, digit_set, unit_phase

__all__ = [
    "FilterBank",
    "SymbolMatrix",
    "SplittingReport",
    "SampledBank",
    "eval_symbol",
    "check_splitting_exact",
    "check_splitting_grid",
    "complete_bank_haar",
    "complete_bank_grid",
    "character_matrix",
    "random_unitary",
    "frequency_grid",
    "default_grid_n",
]


def frequency_grid(dim: int, n: int) -> np.ndarray:
    """Uniform n^dim points of [-pi, pi)^dim as an (n^dim, dim) array."""
    axis = -np.pi + 2.0 * np.pi * np.arange(n) / n
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, dim)


def default_grid_n(dim: int) -> int:
    return 64 if dim <= 2 else 16


@dataclass(frozen=True)
class SymbolMatrix:
    """L x L symbol values at one frequency."""

    xi: np.ndarray
    values: np.ndarray


class FilterBank:
    """Finitely supported matrix filters for channels r = 0 .. a-1.

    Parameters
    ----------
    matrix : DilationMatrix
    L : int
        Multiplicity (size of each symbol matrix).
    channels : mapping
        r -> {(row, col) -> {k -> coefficient}} with integer k (scalars in 1-d,
        tuples otherwise).  Channel 0 is the designated low-pass and must be
        present; other channels may be absent or empty.
    digits_a, digits_b : DigitSet, optional
        Frozen coset representative orders for A and B = A^t.  Defaults are
        computed once and persisted with the bank.
    """

    def __init__(self, matrix: DilationMatrix, L: int, channels,
                 digits_a: DigitSet | None = None, digits_b: DigitSet | None = None):
        if L < 1:
            raise ValueError("L must be >= 1")
        self.matrix = matrix
        self.L = int(L)
        self.digits_a = digits_a if digits_a is not None else digit_set(matrix)
        self.digits_b = digits_b if digits_b is not None else digit_set(matrix, for_transpose=True)
        if self.digits_a.for_transpose or not self.digits_b.for_transpose:
            raise ValueError("digits_a must be for A, digits_b for B")
        a = matrix.det_abs
        store: dict[int, dict[tuple[int, int], tuple[np.ndarray, np.ndarray]]] = {}
        for r, entries in channels.items():
            r = int(r)
            if not 0 <= r < a:
                raise ChannelOutOfRangeError(f"channel {r} outside [0, {a})")
            per: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
            for (row, col), taps in entries.items():
                row, col = int(row), int(col)
                if not (0 <= row < L and 0 <= col < L):
                    raise ValueError(f"entry index ({row}, {col}) outside [0, {L})^2")
                norm = {}
                for k, v in taps.items():
                    kt = (int(k),) if np.isscalar(k) else tuple(int(x) for x in k)
                    if len(kt) != matrix.dim:
                        raise ValueError(f"tap {kt} has wrong dimension")
                    norm[kt] = norm.get(kt, 0.0) + complex(v)
                if not norm:
                    continue
                keys = sorted(norm)
                per[(row, col)] = (
                    np.array(keys, dtype=np.int64),
                    np.array([norm[k] for k in keys], dtype=np.complex128),
                )
            store[r] = per
        if 0 not in store:
            raise ValueError("channel 0 (low-pass) is required")
        self._channels = store
        self._splitting_defect: float | None = None

    @property
    def a(self) -> int:
        return self.matrix.det_abs

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def present_channels(self) -> tuple[int, ...]:
        return tuple(sorted(self._channels))

    def taps(self, r: int, row: int, col: int) -> tuple[np.ndarray, np.ndarray]:
        """Support and coefficients of h^r at (row, col); empty arrays if unset."""
        entry = self._channels.get(r, {}).get((row, col))
        if entry is None:
            return np.zeros((0, self.dim), dtype=np.int64), np.zeros(0, dtype=np.complex128)
        return entry

    def entries(self, r: int):
        return self._channels.get(r, {}).items()

    def support_box(self) -> tuple[np.ndarray, np.ndarray] | None:
        lo, hi = None, None
        for r in self._channels:
            for _, (keys, _) in self.entries(r):
                lo = keys.min(axis=0) if lo is None else np.minimum(lo, keys.min(axis=0))
                hi = keys.max(axis=0) if hi is None else np.maximum(hi, keys.max(axis=0))
        return None if lo is None else (lo, hi)

    def tap_count(self) -> int:
        return sum(len(v) for r in self._channels for _, (_, v) in self.entries(r))

    def key(self) -> tuple:
        items = []
        for r in sorted(self._channels):
            for (row, col), (keys, vals) in sorted(self.entries(r)):
                items.append((r, row, col, tuple(map(tuple, keys.tolist())),
                              tuple(map(complex, vals))))
        return (self.matrix.key(), self.L, self.digits_a.digits, self.digits_b.digits,
                tuple(items))

    def splitting_defect(self) -> float:
        """Cached max defect of the exact splitting check."""
        if self._splitting_defect is None:
            self._splitting_defect = check_splitting_exact(self).max_defect_exact
        return self._splitting_defect


def _symbol_many(fb: FilterBank, r: int, xis: np.ndarray) -> np.ndarray:
    """Channel symbol at many frequencies: (npts, L, L), includes a^(-1/2)."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    out = np.zeros((xis.shape[0], fb.L, fb.L), dtype=np.complex128)
    scale = 1.0 / np.sqrt(fb.a)
    for (row, col), (keys, vals) in fb.entries(r):
        out[:, row, col] = scale * (np.exp(-1j * (xis @ keys.T)) @ vals)
    return out


def eval_symbol(fb: FilterBank, r: int, xi) -> SymbolMatrix:
    """Symbol matrix H_r(xi); zero matrix for an absent channel in range."""
    if not 0 <= r < fb.a:
        raise ChannelOutOfRangeError(f"channel {r} outside [0, {fb.a})")
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.shape != (fb.dim,):
        raise ValueError(f"xi must have length {fb.dim}")
    return SymbolMatrix(xi=xi, values=_symbol_many(fb, r, xi[None, :])[0])


@dataclass(frozen=True)
class SplittingReport:
    """Outcome of the exact and/or grid splitting checks; unused side is None."""

    exact_pass: bool | None
    max_defect_exact: float | None
    grid_pass: bool | None
    max_defect_grid: float | None
    grid_size: int | None

    def merged_with(self, other: "SplittingReport") -> "SplittingReport":
        def pick(x, y):
            return x if x is not None else y

        return SplittingReport(
            exact_pass=pick(self.exact_pass, other.exact_pass),
            max_defect_exact=pick(self.max_defect_exact, other.max_defect_exact),
            grid_pass=pick(self.grid_pass, other.grid_pass),
            max_defect_grid=pick(self.max_defect_grid, other.max_defect_grid),
            grid_size=pick(self.grid_size, other.grid_size),
        )


def _tap_dicts(fb: FilterBank, r: int) -> dict[tuple[int, int], dict[tuple, complex]]:
    out = {}
    for (row, col), (keys, vals) in fb.entries(r):
        out[(row, col)] = {tuple(k): v for k, v in zip(keys.tolist(), vals)}
    return out


def check_splitting_exact(fb: FilterBank, tol: float = 1e-12) -> SplittingReport:
    """Tap-domain orthonormality of the shifted filter family.

    Verifies sum_{m,k} h^r_{j,m,k} conj(h^s_{l,m,k-Ap}) = delta_rs delta_jl
    delta_0p over every channel pair, entry pair, and lattice shift p that the
    supports allow.  Absent channels count as zero and fail the diagonal
    requirement, which is the correct reading for partial banks.
    """
    a, L = fb.a, fb.L
    adj = fb.matrix.adjugate(False)
    det = fb.matrix.det
    per = {r: _tap_dicts(fb, r) for r in range(a)}
    worst = 0.0
    for r in range(a):
        for s in range(a):
            for j in range(L):
                for l in range(L):
                    # collect shift candidates from support differences
                    cands = {(0,) * fb.dim}
                    for m in range(L):
                        k1 = per[r].get((j, m), {})
                        k2 = per[s].get((l, m), {})
                        for u in k1:
                            for v in k2:
                                dv = np.array(u, dtype=np.int64) - np.array(v, dtype=np.int64)
                                num = adj @ dv
                                q, rem = np.divmod(num, det)
                                if not np.any(rem):
                                    cands.add(tuple(int(x) for x in q))
                    for p in sorted(cands):
                        ap = fb.matrix.A @ np.array(p, dtype=np.int64)
                        total = 0.0 + 0.0j
                        for m in range(L):
                            d1 = per[r].get((j, m), {})
                            d2 = per[s].get((l, m), {})
                            for u, cv in d1.items():
                                w = d2.get(tuple(int(x) for x in np.array(u) - ap))
                                if w is not None:
                                    total += cv * np.conj(w)
                        target = 1.0 if (r == s and j == l and not any(p)) else 0.0
                        worst = max(worst, abs(total - target))
    return SplittingReport(
        exact_pass=worst < tol,
        max_defect_exact=float(worst),
        grid_pass=None,
        max_defect_grid=None,
        grid_size=None,
    )


def _shift_vectors(fb: FilterBank) -> np.ndarray:
    """The a frequency shifts 2 pi B^-1 beta for beta in K_B, as rows."""
    binv = fb.matrix.inverse_float(for_transpose=True)
    return 2.0 * np.pi * fb.digits_b.array.astype(float) @ binv.T


def stacked_symbol_samples(fb: FilterBank, points: np.ndarray) -> np.ndarray:
    """The aL x aL stacked matrix (block row r, block column s indexed by K_B
    shifts) sampled at each row of points: (npts, aL, aL)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    shifts = _shift_vectors(fb)
    n = points.shape[0]
    a, L = fb.a, fb.L
    out = np.zeros((n, a * L, a * L), dtype=np.complex128)
    for r in range(a):
        for s in range(a):
            out[:, r * L:(r + 1) * L, s * L:(s + 1) * L] = _symbol_many(
                fb, r, points + shifts[s][None, :])
    return out


def _opnorms(mats: np.ndarray) -> np.ndarray:
    return np.linalg.svd(mats, compute_uv=False)[..., 0]


def check_splitting_grid(fb: FilterBank, grid_n: int | None = None,
                         tol: float = 1e-10) -> SplittingReport:
    """Frequency-domain splitting check on a uniform grid over [-pi, pi)^d.

    At each grid point the sum of H_r H_s^* over the K_B shifts must be
    delta_rs I; the reported defect is the worst spectral norm deviation.
    """
    if grid_n is None:
        grid_n = default_grid_n(fb.dim)
    pts = frequency_grid(fb.dim, grid_n)
    shifts = _shift_vectors(fb)
    a, L = fb.a, fb.L
    sym = np.zeros((a, a, pts.shape[0], L, L), dtype=np.complex128)
    for r in range(a):
        for mu in range(a):
            sym[r, mu] = _symbol_many(fb, r, pts + shifts[mu][None, :])
    worst = 0.0
    eye = np.eye(L)
    for r in range(a):
        for s in range(a):
            acc = np.einsum("mnij,mnkj->nik", sym[r], np.conj(sym[s]))
            if r == s:
                acc = acc - eye[None, :, :]
            worst = max(worst, float(_opnorms(acc).max()))
    return SplittingReport(
        exact_pass=None,
        max_defect_exact=None,
        grid_pass=worst < tol,
        max_defect_grid=float(worst),
        grid_size=int(grid_n),
    )


def character_matrix(matrix: DilationMatrix, digits_a: DigitSet, digits_b: DigitSet) -> np.ndarray:
    """The a x a unitary a^(-1/2) exp(-2 pi i <B^-1 beta_r, alpha_s>)."""
    a = matrix.det_abs
    adj = matrix.adjugate(True)
    out = np.zeros((a, a), dtype=np.complex128)
    for r, beta in enumerate(digits_b.digits):
        num = np.array(beta, dtype=np.int64) @ adj.T
        for s, alpha in enumerate(digits_a.digits):
            out[r, s] = unit_phase(int(np.dot(num, alpha)), matrix.det)
    return out / np.sqrt(a)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian, R-diagonal phase fixed."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d)).conj()


def complete_bank_haar(matrix: DilationMatrix, L: int = 1,
                       digits_a: DigitSet | None = None,
                       digits_b: DigitSet | None = None,
                       unitary: np.ndarray | None = None,
                       tol: float = 1e-12) -> FilterBank:
    """One-tap-per-digit orthonormal bank from an aL x aL unitary.

    Channel r gets taps only on the digits of K_A:
    h^r_{l,j,alpha_s} = U[r L + l, s L + j].  The default U is the character
    matrix tensor I_L, which reduces to the classical two-tap pair
    (1/sqrt2, 1/sqrt2) and (1/sqrt2, -1/sqrt2) for A = [[2]], L = 1.  The
    identity U gives the lazy (polyphase shuffle) bank.
    """
    if digits_a is None:
        digits_a = digit_set(matrix)
    if digits_b is None:
        digits_b = digit_set(matrix, for_transpose=True)
    a = matrix.det_abs
    n = a * L
    if unitary is None:
        unitary = np.kron(character_matrix(matrix, digits_a, digits_b), np.eye(L))
    u = np.asarray(unitary, dtype=np.complex128)
    if u.shape != (n, n):
        raise NotUnitaryError(f"expected a {n} x {n} matrix, got {u.shape}")
    defect = np.abs(u @ u.conj().T - np.eye(n)).max()
    if defect > tol:
        raise NotUnitaryError(f"unitarity defect {defect:.3e} exceeds {tol:.1e}")
    channels: dict[int, dict] = {}
    for r in range(a):
        entries: dict[tuple[int, int], dict] = {}
        for l in range(L):
            for j in range(L):
                for s, alpha in enumerate(digits_a.digits):
                    v = u[r * L + l, s * L + j]
                    if v != 0:
                        entries.setdefault((l, j), {})[alpha] = v
        channels[r] = entries
    return FilterBank(matrix, L, channels, digits_a, digits_b)


@dataclass(frozen=True)
class SampledBank:
    """Pointwise unitary completion of a low-pass symbol on a frequency grid.

    h[i] is the aL x aL stacked matrix chosen at points[i]; rows 0..L-1 are
    the low-pass rows, row r*L + l holds channel r entry row l.  Values are
    per-point only: no smoothness in xi is claimed.
    """

    matrix: DilationMatrix
    L: int
    grid_n: int
    points: np.ndarray
    h: np.ndarray
    digits_a: DigitSet
    digits_b: DigitSet

    @property
    def a(self) -> int:
        return self.matrix.det_abs

    def block(self, r: int, s: int) -> np.ndarray:
        L = self.L
        return self.h[:, r * L:(r + 1) * L, s * L:(s + 1) * L]

    def unitarity_defect(self) -> float:
        eye = np.eye(self.h.shape[1])
        return float(_opnorms(self.h @ np.conj(np.transpose(self.h, (0, 2, 1))) - eye).max())


def _orthonormalize_rows(rows: np.ndarray, n: int, span_tol: float) -> np.ndarray:
    """Extend orthonormal rows to an n x n unitary with canonical seeds.

    Candidate seeds are the standard basis vectors in index order; each is
    projected against the accepted rows twice (classical reorthogonalization)
    so the result is unitary to machine precision even for barely independent
    seeds.
    """
    out = np.zeros((n, n), dtype=np.complex128)
    count = rows.shape[0]
    out[:count] = rows
    for i in range(n):
        if count == n:
            break
        v = np.zeros(n, dtype=np.complex128)
        v[i] = 1.0
        for _ in range(2):
            for t in range(count):
                v = v - np.vdot(out[t], v) * out[t]
        norm = np.linalg.norm(v)
        if norm > span_tol:
            out[count] = v / norm
            count += 1
    if count != n:
        raise InternalInconsistencyError("completion ran out of independent seeds")
    return out


def complete_bank_grid(fb: FilterBank, grid_n: int | None = None,
                       iso_tol: float = 1e-8) -> SampledBank:
    """Pointwise unitary completion of the low-pass channel on a grid.

    Parameters
    ----------
    fb : FilterBank
        Only channel 0 is read.  Its L stacked rows (entries across the K_B
        shifts) must be orthonormal at every grid point to within iso_tol,
        else LowPassNotIsometricError identifies the worst point.
    grid_n : int, optional
        Points per dimension of the uniform [-pi, pi)^d grid.

    Returns
    -------
    SampledBank with h unitary at every point (defect < 1e-10).
    """
    if grid_n is None:
        grid_n = default_grid_n(fb.dim)
    pts = frequency_grid(fb.dim, grid_n)
    shifts = _shift_vectors(fb)
    a, L = fb.a, fb.L
    n = a * L
    low = np.zeros((pts.shape[0], L, n), dtype=np.complex128)
    for s in range(a):
        low[:, :, s * L:(s + 1) * L] = _symbol_many(fb, 0, pts + shifts[s][None, :])
    gram = low @ np.conj(np.transpose(low, (0, 2, 1)))
    defects = _opnorms(gram - np.eye(L))
    worst = int(np.argmax(defects))
    if defects[worst] > iso_tol:
        raise LowPassNotIsometricError(pts[worst], float(defects[worst]))
    h = np.zeros((pts.shape[0], n, n), dtype=np.complex128)
    for i in range(pts.shape[0]):
        h[i] = _orthonormalize_rows(low[i], n, span_tol=iso_tol)
    return SampledBank(matrix=fb.matrix, L=L, grid_n=int(grid_n), points=pts, h=h,
                       digits_a=fb.digits_a, digits_b=fb.digits_b)
