"""Packet analysis and synthesis on periodic grids Z^d / A^j Z^d.

Grids index their cells by the digit expansion of the representative
sum_i A^i K_A[d_i], least significant digit first, so level-j cell m sits at
lattice point representative(m).  Filters act by correlation with taps
reduced modulo A^j Z^d; for an orthonormal bank that reduction keeps each
split exactly unitary, which is what makes perfect reconstruction hold to
float precision at every level.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, check_partition
from .errors import (
    DepthExceedsLevelError,
    InadmissibleBasisError,
    IncompleteTreeError,
    InternalInconsistencyError,
    LevelZeroError,
    MissingNodeError,
    NotOrthonormalError,
    ShapeMismatchError,
)
from .filterbank import FilterBank, SymbolMatrix, _symbol_many
from .lattice import (
    DigitSet,
    DilationMatrix,
    enumerate_representatives,
    reduce_mod_many,
)

__all__ = [
    "CoefficientGrid",
    "PacketTree",
    "a_adic_expansion",
    "packet_symbol",
    "analyze_step",
    "synthesize_step",
    "decompose",
    "reconstruct",
]

ORTHONORMAL_TOL = 1e-12


@dataclass
class CoefficientGrid:
    """Complex coefficients on Z^d / A^level Z^d, one row per component.

    values has shape (L, a^level); the cell order is fixed by the digit set.
    """

    matrix: DilationMatrix
    digits: DigitSet
    level: int
    values: np.ndarray

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if self.digits.for_transpose:
            raise ValueError("grids index by digits of A, not B")
        if self.digits.matrix != self.matrix:
            raise ShapeMismatchError("digit set belongs to a different matrix")
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.ndim == 1:
            vals = vals[None, :]
        cells = self.matrix.det_abs**self.level
        if vals.ndim != 2 or vals.shape[1] != cells:
            raise ShapeMismatchError(
                f"values must be (L, {cells}) at level {self.level}, got {vals.shape}")
        self.values = vals

    @property
    def L(self) -> int:
        return self.values.shape[0]

    @property
    def cells(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "CoefficientGrid":
        return CoefficientGrid(self.matrix, self.digits, self.level, self.values.copy())

    def energy(self) -> float:
        return float((np.abs(self.values) ** 2).sum())

    @classmethod
    def zeros(cls, matrix: DilationMatrix, digits: DigitSet, level: int, L: int):
        return cls(matrix, digits, level,
                   np.zeros((L, matrix.det_abs**level), dtype=np.complex128))


def a_adic_expansion(n: int, a: int) -> tuple[int, ...]:
    """Digits of n base a, least significant first, no trailing zero; 0 -> ()."""
    if a < 2:
        raise ValueError("a must be >= 2")
    if n < 0:
        raise ValueError("n must be >= 0")
    digits = []
    while n:
        n, d = divmod(n, a)
        digits.append(d)
    return tuple(digits)


def packet_symbol(fb: FilterBank, n: int, xi) -> SymbolMatrix:
    """Product of channel symbols along the digit path of packet n.

    For digits (mu_1, ..., mu_j) of n the value is
    H_{mu_1}(B^-1 xi) H_{mu_2}(B^-2 xi) ... H_{mu_j}(B^-j xi); packet 0 gives
    the identity.
    """
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.shape != (fb.dim,):
        raise ValueError(f"xi must have length {fb.dim}")
    binv = fb.matrix.inverse_float(for_transpose=True)
    out = np.eye(fb.L, dtype=np.complex128)
    v = xi.copy()
    for mu in a_adic_expansion(n, fb.a):
        v = binv @ v
        out = out @ _symbol_many(fb, mu, v[None, :])[0]
    return SymbolMatrix(xi=xi, values=out)


_REPS_CACHE: dict = {}
_PERM_CACHE: dict = {}


def _reps(matrix: DilationMatrix, ds: DigitSet, level: int) -> np.ndarray:
    key = (matrix.key(), ds.key(), level)
    hit = _REPS_CACHE.get(key)
    if hit is None:
        hit = enumerate_representatives(matrix, ds, level)
        if len(_REPS_CACHE) > 256:
            _REPS_CACHE.clear()
        _REPS_CACHE[key] = hit
    return hit


def _tap_perm(matrix: DilationMatrix, ds: DigitSet, level: int, tap: tuple) -> np.ndarray:
    """Child cell k -> parent cell holding A rep(k) + tap, at parent level."""
    key = (matrix.key(), ds.key(), level, tap)
    hit = _PERM_CACHE.get(key)
    if hit is None:
        reps = _reps(matrix, ds, level - 1)
        shifted = reps @ matrix.A.T + np.asarray(tap, dtype=np.int64)[None, :]
        hit = reduce_mod_many(shifted, level, ds)
        if len(_PERM_CACHE) > 4096:
            _PERM_CACHE.clear()
        _PERM_CACHE[key] = hit
    return hit


def _check_compat(grid: CoefficientGrid, fb: FilterBank):
    if grid.matrix != fb.matrix or grid.digits.key() != fb.digits_a.key():
        raise ShapeMismatchError("grid and bank disagree on matrix or digit order")
    if grid.L != fb.L:
        raise ShapeMismatchError(f"grid has L={grid.L}, bank has L={fb.L}")


def _require_orthonormal(fb: FilterBank, force: bool):
    defect = fb.splitting_defect()
    if defect >= ORTHONORMAL_TOL:
        if not force:
            raise NotOrthonormalError(
                f"bank fails the exact splitting check (defect {defect:.3e}); "
                "pass force=True to proceed anyway")
        warnings.warn(f"proceeding with non-orthonormal bank (defect {defect:.3e})",
                      stacklevel=3)


def analyze_step(grid: CoefficientGrid, fb: FilterBank, force: bool = False
                 ) -> tuple[CoefficientGrid, ...]:
    """One splitting step: level-j coefficients to a children at level j-1.

    Child r cell k is sum_{m,t} conj(h^r_{l,m,t}) c_m[Ak + t mod A^j]; for an
    orthonormal bank the map is unitary, so energies add up exactly.
    """
    if grid.level == 0:
        raise LevelZeroError("cannot analyze a level-0 grid")
    _check_compat(grid, fb)
    _require_orthonormal(fb, force)
    j = grid.level
    out = np.zeros((fb.a, fb.L, grid.cells // fb.a), dtype=np.complex128)
    for r in range(fb.a):
        for (row, col), (keys, vals) in fb.entries(r):
            for i in range(len(keys)):
                perm = _tap_perm(grid.matrix, grid.digits, j, tuple(keys[i].tolist()))
                out[r, row] += np.conj(vals[i]) * grid.values[col, perm]
    return tuple(
        CoefficientGrid(grid.matrix, grid.digits, j - 1, out[r]) for r in range(fb.a))


def synthesize_step(children, fb: FilterBank, force: bool = False) -> CoefficientGrid:
    """Adjoint of analyze_step: a sibling grids back to their parent."""
    children = tuple(children)
    if len(children) != fb.a:
        raise ShapeMismatchError(f"need {fb.a} children, got {len(children)}")
    base = children[0]
    for c in children:
        _check_compat(c, fb)
        if c.level != base.level or c.L != base.L:
            raise ShapeMismatchError("children disagree on level or L")
    _require_orthonormal(fb, force)
    j = base.level + 1
    out = np.zeros((fb.L, base.cells * fb.a), dtype=np.complex128)
    for r in range(fb.a):
        for (row, col), (keys, vals) in fb.entries(r):
            for i in range(len(keys)):
                perm = _tap_perm(base.matrix, base.digits, j, tuple(keys[i].tolist()))
                out[col, perm] += vals[i] * children[r].values[row]
    return CoefficientGrid(base.matrix, base.digits, j, out)


class PacketTree:
    """All packet nodes of a decomposition, keyed by (packet index, depth).

    The node at (n, dep) holds coefficients at level root_level - dep; its
    children under channel s live at (a n + s, dep + 1).
    """

    def __init__(self, bank: FilterBank, root_level: int, depth: int,
                 nodes: dict[tuple[int, int], CoefficientGrid]):
        self.bank = bank
        self.root_level = int(root_level)
        self.depth = int(depth)
        self.nodes = dict(nodes)

    @property
    def a(self) -> int:
        return self.bank.a

    @property
    def L(self) -> int:
        return self.bank.L

    def has_node(self, n: int, dep: int) -> bool:
        return (n, dep) in self.nodes

    def node(self, n: int, dep: int) -> CoefficientGrid:
        try:
            return self.nodes[(n, dep)]
        except KeyError:
            raise MissingNodeError(f"tree has no node ({n}, depth {dep})") from None

    def ensure_complete(self):
        for dep in range(self.depth + 1):
            for n in range(self.a**dep):
                if (n, dep) not in self.nodes:
                    raise IncompleteTreeError(f"missing node ({n}, depth {dep})")

    def leaves(self) -> list[tuple[int, int]]:
        return [(n, self.depth) for n in range(self.a**self.depth)]


def decompose(grid: CoefficientGrid, fb: FilterBank, depth: int,
              force: bool = False) -> PacketTree:
    """Full packet tree of the grid down to the given depth (all nodes kept)."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth > grid.level:
        raise DepthExceedsLevelError(
            f"depth {depth} exceeds the data level {grid.level}")
    _check_compat(grid, fb)
    if depth > 0:
        _require_orthonormal(fb, force)
    nodes = {(0, 0): grid.copy()}
    for dep in range(depth):
        for n in range(fb.a**dep):
            children = analyze_step(nodes[(n, dep)], fb, force=True)
            for s, child in enumerate(children):
                nodes[(fb.a * n + s, dep + 1)] = child
    return PacketTree(fb, grid.level, depth, nodes)


def reconstruct(tree: PacketTree, spec: BasisSpec, force: bool = False) -> CoefficientGrid:
    """Rebuild the root grid from the nodes an admissible basis selects.

    The basis must tile [0, a^J) for J = its own exponent, and every selected
    node must exist in the tree; siblings are synthesized bottom-up, which for
    an orthonormal bank inverts decompose exactly up to float rounding.
    """
    if spec.a != tree.a:
        raise ShapeMismatchError(f"basis has a={spec.a}, tree has a={tree.a}")
    report = check_partition(spec)
    if not report.admissible:
        raise InadmissibleBasisError(
            f"basis does not tile [0, {spec.a}^{spec.J}): "
            f"overlaps={list(report.overlaps)}, gaps={list(report.gaps)}, "
            f"out_of_range={list(report.out_of_range)}")
    if spec.J > tree.depth:
        raise MissingNodeError(
            f"basis exponent {spec.J} exceeds the tree depth {tree.depth}")
    if spec.J > 0:
        _require_orthonormal(tree.bank, force)
    work: dict[tuple[int, int], CoefficientGrid] = {}
    for n, j in spec.nodes:
        dep = spec.J - j
        work[(n, dep)] = tree.node(n, dep)
    while True:
        max_dep = max(dep for _, dep in work)
        if max_dep == 0:
            break
        group: dict[int, dict[int, CoefficientGrid]] = {}
        for (n, dep) in list(work):
            if dep == max_dep:
                group.setdefault(n // tree.a, {})[n % tree.a] = work.pop((n, dep))
        for parent, siblings in sorted(group.items()):
            if len(siblings) != tree.a:
                raise InternalInconsistencyError(
                    "admissible basis produced an incomplete sibling group")
            ordered = tuple(siblings[s] for s in range(tree.a))
            merged = synthesize_step(ordered, tree.bank, force=True)
            if (parent, max_dep - 1) in work:
                raise InternalInconsistencyError("duplicate parent during synthesis")
            work[(parent, max_dep - 1)] = merged
    return work[(0, 0)].copy()
