"""Block symbol calculus and frame-bound certification.

Three aL x aL objects sampled on frequency grids: the stacked filter matrix
H(xi) (block (r, s) is H_r(xi + 2 pi B^-1 beta_s)), the polyphase matrix
P(xi) (block (r, s) collects the taps congruent to digit alpha_s), and the
character matrix E(xi).  They satisfy H(xi) = P(B xi) E(xi) identically, E is
always unitary, and the extreme eigenvalues of H* H certify frame bounds for
the periodized packet transform.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import EigenFailureError, InvalidBoundsError, SizeOverflowError
from .filterbank import (
    FilterBank,
    _opnorms,
    _shift_vectors,
    default_grid_n,
    frequency_grid,
    stacked_symbol_samples,
)
from .lattice import DigitSet, DilationMatrix, digit_of, unit_phase

__all__ = [
    "BlockSymbol",
    "FrameReport",
    "build_E",
    "build_H",
    "build_P",
    "sample_E",
    "sample_H",
    "sample_P",
    "verify_factorization",
    "frame_bounds",
    "propagate_bounds",
    "frame_condition_check",
]

EIGEN_SIZE_LIMIT = 64


@dataclass(frozen=True)
class BlockSymbol:
    """aL x aL block matrix at one frequency; block (r, s) is L x L."""

    xi: np.ndarray
    values: np.ndarray
    a: int
    L: int
    kind: str

    def block(self, r: int, s: int) -> np.ndarray:
        L = self.L
        return self.values[r * L:(r + 1) * L, s * L:(s + 1) * L]


def sample_E(matrix: DilationMatrix, digits_a: DigitSet, digits_b: DigitSet,
             points: np.ndarray, L: int = 1) -> np.ndarray:
    """Character matrix samples: block (r, s) is
    a^(-1/2) exp(-i <xi + 2 pi B^-1 beta_s, alpha_r>) I_L."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a = matrix.det_abs
    adj_b = matrix.adjugate(True)
    alphas = digits_a.array
    out = np.zeros((pts.shape[0], a * L, a * L), dtype=np.complex128)
    eye = np.eye(L)
    scale = 1.0 / np.sqrt(a)
    for r, alpha in enumerate(alphas):
        carrier = np.exp(-1j * (pts @ alpha.astype(float)))
        for s, beta in enumerate(digits_b.digits):
            # exp(-2 pi i <B^-1 beta_s, alpha_r>), exact at quarter turns
            twist = unit_phase(int(np.dot(adj_b @ np.array(beta, dtype=np.int64), alpha)),
                               matrix.det)
            vals = scale * twist * carrier
            out[:, r * L:(r + 1) * L, s * L:(s + 1) * L] = vals[:, None, None] * eye
    return out


def build_E(matrix: DilationMatrix, digits_a: DigitSet, digits_b: DigitSet,
            xi, L: int = 1) -> BlockSymbol:
    """Unitary character matrix E(xi) relating H and the polyphase matrix."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    vals = sample_E(matrix, digits_a, digits_b, xi[None, :], L)[0]
    return BlockSymbol(xi=xi, values=vals, a=matrix.det_abs, L=L, kind="E")


def sample_H(fb: FilterBank, points: np.ndarray) -> np.ndarray:
    return stacked_symbol_samples(fb, points)


def build_H(fb: FilterBank, xi) -> BlockSymbol:
    """Stacked shifted-symbol matrix; unitary iff the bank splits orthonormally."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    vals = sample_H(fb, xi[None, :])[0]
    return BlockSymbol(xi=xi, values=vals, a=fb.a, L=fb.L, kind="H")


def sample_P(fb: FilterBank, points: np.ndarray) -> np.ndarray:
    """Polyphase samples: block (r, s) entry (l, j) is
    sum_k h^r_{l,j,alpha_s + A k} exp(-i <xi, k>); no a^(-1/2) factor."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a, L = fb.a, fb.L
    out = np.zeros((pts.shape[0], a * L, a * L), dtype=np.complex128)
    for r in range(a):
        for (row, col), (keys, vals) in fb.entries(r):
            for i in range(len(keys)):
                s, q = digit_of(keys[i], fb.digits_a)
                phase = np.exp(-1j * (pts @ q.astype(float)))
                out[:, r * L + row, s * L + col] += vals[i] * phase
    return out


def build_P(fb: FilterBank, xi) -> BlockSymbol:
    xi = np.asarray(xi, dtype=float).reshape(-1)
    return BlockSymbol(xi=xi, values=sample_P(fb, xi[None, :])[0],
                       a=fb.a, L=fb.L, kind="P")


def verify_factorization(fb: FilterBank, grid_n: int | None = None) -> float:
    """Worst spectral-norm defect of H(xi) - P(B xi) E(xi) over the grid.

    The identity is algebraic in the taps, so it holds for any bank, not just
    orthonormal ones; the return value is float noise when the code is right.
    """
    if grid_n is None:
        grid_n = default_grid_n(fb.dim)
    pts = frequency_grid(fb.dim, grid_n)
    h = sample_H(fb, pts)
    p = sample_P(fb, pts @ fb.matrix.B.astype(float).T)
    e = sample_E(fb.matrix, fb.digits_a, fb.digits_b, pts, fb.L)
    return float(_opnorms(h - p @ e).max())


@dataclass(frozen=True)
class FrameReport:
    """Grid-certified two-sided bounds for the stacked symbol."""

    grid_n: int
    lambda_min: float
    lambda_max: float
    lipschitz_slack: float
    unitary: bool
    c1: float
    c2: float
    per_level: tuple[tuple[int, float, float], ...]


def _gram_extremes(samples: np.ndarray):
    gram = np.conj(np.transpose(samples, (0, 2, 1))) @ samples
    try:
        eigs = np.linalg.eigvalsh(gram)
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(f"eigenvalue solve failed: {exc}") from exc
    if not np.all(np.isfinite(eigs)):
        raise EigenFailureError("non-finite eigenvalues in frame certification")
    return float(eigs[:, 0].min()), float(eigs[:, -1].max())


def _lipschitz_slack(fb: FilterBank, grid_n: int) -> float:
    """Bound on how far off-grid eigenvalues of H*H can drift.

    Per entry, sup |h| <= a^(-1/2) sum |v| and sup |grad h| <= a^(-1/2)
    sum |v| |k|; each entry recurs in a shifted columns, giving Frobenius
    bounds M and G with |lambda(xi) - lambda(eta)| <= 2 M G |xi - eta|, and
    no grid point is farther than pi sqrt(d) / grid_n from any frequency.
    """
    sup_sq = 0.0
    grad_sq = 0.0
    for r in range(fb.a):
        for (_, _), (keys, vals) in fb.entries(r):
            absv = np.abs(vals)
            sup_sq += float(absv.sum()) ** 2
            grad_sq += float((absv * np.linalg.norm(keys, axis=1)).sum()) ** 2
    rho = np.pi * np.sqrt(fb.dim) / grid_n
    return float(2.0 * np.sqrt(sup_sq) * np.sqrt(grad_sq) * rho)


def frame_bounds(fb: FilterBank, grid_n: int | None = None, c1: float = 1.0,
                 c2: float = 1.0, levels: int = 0,
                 unitary_tol: float = 1e-8) -> FrameReport:
    """Grid extremes of the eigenvalues of H*(xi) H(xi), with slack estimate.

    Parameters
    ----------
    fb : FilterBank
    grid_n : int, optional
        Points per dimension; defaults to 256 in 1-d, else default_grid_n.
    c1, c2 : float
        Input-space frame bounds to propagate through the per-level table.
    levels : int
        Depth of the per-level table (rows j = 0 .. levels).

    The unitary flag is set when both extremes are within 1e-8 of 1; nothing
    is snapped, the reported extremes stay raw.
    """
    if grid_n is None:
        grid_n = 256 if fb.dim == 1 else default_grid_n(fb.dim)
    if fb.a * fb.L > EIGEN_SIZE_LIMIT:
        raise SizeOverflowError(f"aL = {fb.a * fb.L} exceeds eigensolve limit")
    pts = frequency_grid(fb.dim, grid_n)
    lo, hi = _gram_extremes(sample_H(fb, pts))
    unitary = abs(lo - 1.0) < unitary_tol and abs(hi - 1.0) < unitary_tol
    report = FrameReport(
        grid_n=int(grid_n),
        lambda_min=lo,
        lambda_max=hi,
        lipschitz_slack=_lipschitz_slack(fb, grid_n),
        unitary=unitary,
        c1=float(c1),
        c2=float(c2),
        per_level=(),
    )
    return replace(report, per_level=propagate_bounds(report, c1, c2, levels))


def propagate_bounds(report: FrameReport, c1: float, c2: float,
                     levels: int) -> tuple[tuple[int, float, float], ...]:
    """Per-level table (j, lambda_min^j c1, lambda_max^j c2) for j <= levels."""
    if not (0 < c1 <= c2):
        raise InvalidBoundsError(f"need 0 < C1 <= C2, got ({c1}, {c2})")
    if levels < 0:
        raise ValueError("levels must be >= 0")
    return tuple(
        (j, report.lambda_min**j * c1, report.lambda_max**j * c2)
        for j in range(levels + 1)
    )


def frame_condition_check(source, grid_n: int | None = None, c1: float = 1.0,
                          c2: float = 1.0, tol: float = 1e-10) -> bool:
    """True iff all eigenvalues of P* P lie in [C1 - tol, C2 + tol] on the grid.

    source may be a FilterBank (its polyphase matrix is sampled) or a
    precomputed (npts, m, m) sample array.
    """
    if not (0 < c1 <= c2):
        raise InvalidBoundsError(f"need 0 < C1 <= C2, got ({c1}, {c2})")
    if isinstance(source, FilterBank):
        if source.a * source.L > EIGEN_SIZE_LIMIT:
            raise SizeOverflowError(f"aL = {source.a * source.L} exceeds eigensolve limit")
        if grid_n is None:
            grid_n = 256 if source.dim == 1 else default_grid_n(source.dim)
        samples = sample_P(source, frequency_grid(source.dim, grid_n))
    else:
        samples = np.asarray(source, dtype=np.complex128)
        if samples.ndim != 3 or samples.shape[1] != samples.shape[2]:
            raise ValueError("sample array must have shape (npts, m, m)")
        if samples.shape[1] > EIGEN_SIZE_LIMIT:
            raise SizeOverflowError(f"m = {samples.shape[1]} exceeds eigensolve limit")
    lo, hi = _gram_extremes(samples)
    return bool(lo >= c1 - tol and hi <= c2 + tol)
