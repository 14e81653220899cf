"""Estimator facade: packet transforms as array-in, array-out pipeline steps.

Rows of X are flattened (L, a^J) coefficient grids in C order; transform
returns the coefficients of the selected basis, concatenated node by node in
interval order, so the feature count is preserved and inverse_transform is an
exact inverse for orthonormal banks.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .basis import BasisSpec, _select_from_costs, check_partition, level_basis, node_costs, wavelet_basis
from .filterbank import FilterBank, complete_bank_haar
from .lattice import DilationMatrix
from .packets import CoefficientGrid, PacketTree, decompose, reconstruct

__all__ = ["PacketTransformer", "as_complex_matrix"]


def as_complex_matrix(X, name: str = "X") -> np.ndarray:
    """Validate a 2-d finite array and return it as complex128."""
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not (np.isfinite(arr.real).all() and np.isfinite(arr.imag).all()):
        raise ValueError(f"{name} contains non-finite values")
    return arr


class PacketTransformer(TransformerMixin, BaseEstimator):
    """Packet decomposition of flattened coefficient grids.

    Parameters
    ----------
    matrix : array-like of int
        Dilation matrix; ignored when an explicit bank is given.
    L : int
        Multiplicity; ignored when an explicit bank is given.
    depth : int
        Decomposition depth D; the basis tiles [0, a^D).
    bank : FilterBank, optional
        Orthonormal bank to use; default is the one-tap-per-digit bank.
    basis : {"level", "wavelet", "best"} or BasisSpec
        Which admissible basis the transform represents the data in.  "best"
        minimizes the summed per-sample node costs seen in fit.
    cost : str or tuple or callable
        Cost identifier for basis="best" (see make_cost).

    Attributes
    ----------
    bank_ : FilterBank
    basis_ : BasisSpec
    level_ : int
        Grid level J of the input rows, solved from n_features = L * a^J.
    n_features_in_ : int
    """

    def __init__(self, matrix=((2,),), L=1, depth=1, bank=None,
                 basis="level", cost="entropy"):
        self.matrix = matrix
        self.L = L
        self.depth = depth
        self.bank = bank
        self.basis = basis
        self.cost = cost

    # -- fitting ------------------------------------------------------------

    def _resolve_bank(self) -> FilterBank:
        if self.bank is not None:
            if not isinstance(self.bank, FilterBank):
                raise TypeError("bank must be a FilterBank")
            return self.bank
        return complete_bank_haar(DilationMatrix(self.matrix), L=int(self.L))

    def fit(self, X, y=None):
        X = as_complex_matrix(X)
        bank = self._resolve_bank()
        depth = int(self.depth)
        if depth < 0:
            raise ValueError("depth must be >= 0")
        a = bank.a
        n = X.shape[1]
        level, size = 0, bank.L
        while size < n:
            level += 1
            size *= a
        if size != n:
            raise ValueError(
                f"n_features = {n} is not L * a^J for L = {bank.L}, a = {a}")
        if depth > level:
            raise ValueError(f"depth {depth} exceeds the data level {level}")
        self.bank_ = bank
        self.level_ = level
        self.n_features_in_ = n
        self.basis_ = self._resolve_basis(X, bank, depth)
        # coefficient layout: one contiguous block per basis node
        sections = []
        start = 0
        for (node_n, j) in self.basis_.nodes:
            dep = self.basis_.J - j
            block = bank.L * a**(level - dep)
            sections.append(((node_n, dep), slice(start, start + block)))
            start += block
        if start != n:
            raise AssertionError("basis blocks do not add up to the feature count")
        self._sections = sections
        return self

    def _resolve_basis(self, X, bank: FilterBank, depth: int) -> BasisSpec:
        if isinstance(self.basis, BasisSpec):
            spec = self.basis
            if spec.a != bank.a or spec.J != depth:
                raise ValueError(
                    f"basis has (a, J) = ({spec.a}, {spec.J}), expected ({bank.a}, {depth})")
            if not check_partition(spec).admissible:
                raise ValueError("given basis is not admissible")
            return spec
        if self.basis == "level":
            return level_basis(bank.a, depth, depth)
        if self.basis == "wavelet":
            return wavelet_basis(bank.a, depth)
        if self.basis == "best":
            totals: dict[tuple[int, int], float] = {
                (n, dep): 0.0
                for dep in range(depth + 1) for n in range(bank.a**dep)}
            for row in X:
                tree = self._grow(row, bank, depth)
                for key, c in node_costs(tree, self.cost).items():
                    totals[key] += c
            selected, _ = _select_from_costs(totals, bank.a, depth)
            nodes = tuple((n, depth - dep) for n, dep in selected)
            return BasisSpec(a=bank.a, J=depth, nodes=nodes, provenance="best-basis")
        raise ValueError(f"unknown basis {self.basis!r}")

    # -- transforming -------------------------------------------------------

    def _grow(self, row: np.ndarray, bank: FilterBank, depth: int) -> PacketTree:
        level = getattr(self, "level_", None)
        if level is None:
            raise AssertionError("_grow before fit")
        grid = CoefficientGrid(bank.matrix, bank.digits_a, level,
                               row.reshape(bank.L, bank.a**level))
        return decompose(grid, bank, depth)

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "bank_")
        X = as_complex_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, fit saw {self.n_features_in_}")
        out = np.empty_like(X)
        depth = self.basis_.J
        for i, row in enumerate(X):
            tree = self._grow(row, self.bank_, depth)
            for key, sl in self._sections:
                out[i, sl] = tree.node(*key).values.ravel()
        return out

    def inverse_transform(self, X) -> np.ndarray:
        check_is_fitted(self, "bank_")
        X = as_complex_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, fit saw {self.n_features_in_}")
        bank = self.bank_
        out = np.empty_like(X)
        for i, row in enumerate(X):
            nodes = {}
            for (key, sl) in self._sections:
                node_n, dep = key
                cells = bank.a**(self.level_ - dep)
                nodes[key] = CoefficientGrid(
                    bank.matrix, bank.digits_a, self.level_ - dep,
                    row[sl].reshape(bank.L, cells))
            tree = PacketTree(bank, self.level_, self.basis_.J, nodes)
            out[i] = reconstruct(tree, self.basis_).values.ravel()
        return out
