import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SQ2
from packetlab.basis import BasisSpec, level_basis, wavelet_basis
from packetlab.errors import (
    DepthExceedsLevelError,
    InadmissibleBasisError,
    LevelZeroError,
    MissingNodeError,
    NotOrthonormalError,
    ShapeMismatchError,
)
from packetlab.filterbank import FilterBank, eval_symbol
from packetlab.lattice import digit_set
from packetlab.packets import (
    CoefficientGrid,
    a_adic_expansion,
    analyze_step,
    decompose,
    packet_symbol,
    reconstruct,
    synthesize_step,
)


def grid_1d(dyadic, level, values):
    return CoefficientGrid(dyadic, digit_set(dyadic), level, np.asarray(values, dtype=complex))


def random_grid(matrix, level, L, rng):
    ds = digit_set(matrix)
    cells = matrix.det_abs**level
    vals = rng.standard_normal((L, cells)) + 1j * rng.standard_normal((L, cells))
    return CoefficientGrid(matrix, ds, level, vals)


class TestExpansion:
    def test_examples(self):
        assert a_adic_expansion(0, 2) == ()
        assert a_adic_expansion(5, 2) == (1, 0, 1)
        assert a_adic_expansion(7, 3) == (1, 2)

    @given(st.integers(0, 10**9), st.integers(2, 7))
    def test_round_trip(self, n, a):
        digits = a_adic_expansion(n, a)
        assert all(0 <= d < a for d in digits)
        if digits:
            assert digits[-1] != 0
        assert sum(d * a**i for i, d in enumerate(digits)) == n

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            a_adic_expansion(-1, 2)


class TestPacketSymbol:
    def test_zero_is_identity(self, haar1d):
        assert np.allclose(packet_symbol(haar1d, 0, 1.3).values, np.eye(1))

    def test_depth_one(self, haar1d):
        xi = 0.9
        want = eval_symbol(haar1d, 1, xi / 2).values
        assert np.allclose(packet_symbol(haar1d, 1, xi).values, want)

    def test_digit_path_product(self, haar1d):
        xi = 2.1
        want = (eval_symbol(haar1d, 1, xi / 2).values
                @ eval_symbol(haar1d, 0, xi / 4).values
                @ eval_symbol(haar1d, 1, xi / 8).values)
        assert np.allclose(packet_symbol(haar1d, 5, xi).values, want)

    def test_matrix_valued(self, bank_l2):
        out = packet_symbol(bank_l2, 3, 0.4).values
        assert out.shape == (2, 2)


class TestAnalyze:
    def test_haar_constant(self, dyadic, haar1d):
        c = grid_1d(dyadic, 2, [1.0, 1.0, 1.0, 1.0])
        low, high = analyze_step(c, haar1d)
        assert np.allclose(low.values, [[np.sqrt(2), np.sqrt(2)]])
        assert np.allclose(high.values, 0)

    def test_lazy_deinterleaves(self, dyadic, lazy1d):
        c = grid_1d(dyadic, 3, np.arange(8.0))
        even, odd = analyze_step(c, lazy1d)
        assert np.allclose(even.values, [[0, 2, 4, 6]])
        assert np.allclose(odd.values, [[1, 3, 5, 7]])

    def test_energy_preserved_per_split(self, corpus_banks, rng):
        for name, fb in corpus_banks.items():
            c = random_grid(fb.matrix, 2, fb.L, rng)
            children = analyze_step(c, fb)
            total = sum(ch.energy() for ch in children)
            assert abs(total - c.energy()) < 1e-10 * max(1.0, c.energy()), name

    def test_level_zero_rejected(self, dyadic, haar1d):
        c = grid_1d(dyadic, 0, [1.0])
        with pytest.raises(LevelZeroError):
            analyze_step(c, haar1d)

    def test_bank_mismatch_rejected(self, dyadic, bank_l2):
        c = grid_1d(dyadic, 2, np.arange(4.0))
        with pytest.raises(ShapeMismatchError):
            analyze_step(c, bank_l2)

    def test_non_orthonormal_needs_force(self, dyadic):
        fb = FilterBank(dyadic, 1, {0: {(0, 0): {0: 1.0, 1: 1.0}},
                                    1: {(0, 0): {0: 1.0, 1: -1.0}}})
        c = grid_1d(dyadic, 1, [1.0, 2.0])
        with pytest.raises(NotOrthonormalError):
            analyze_step(c, fb)
        with pytest.warns(UserWarning):
            analyze_step(c, fb, force=True)


class TestRoundTrip:
    def test_single_step(self, corpus_banks, rng):
        for name, fb in corpus_banks.items():
            c = random_grid(fb.matrix, 2, fb.L, rng)
            children = analyze_step(c, fb)
            back = synthesize_step(children, fb)
            assert np.abs(back.values - c.values).max() < 1e-10, name

    def test_delta_energy(self, dyadic, haar1d):
        c = grid_1d(dyadic, 3, np.eye(1, 8)[0])
        low, high = analyze_step(c, haar1d)
        assert abs(low.energy() + high.energy() - 1.0) < 1e-12

    def test_wrong_child_count(self, dyadic, haar1d):
        c = grid_1d(dyadic, 2, np.arange(4.0))
        low, _ = analyze_step(c, haar1d)
        with pytest.raises(ShapeMismatchError):
            synthesize_step((low,), haar1d)


class TestDecompose:
    def test_child_index_law(self, dyadic, haar1d, rng):
        tree = decompose(random_grid(dyadic, 3, 1, rng), haar1d, 3)
        for dep in range(3):
            for n in range(2**dep):
                parent = tree.node(n, dep)
                kids = analyze_step(parent, haar1d)
                for s, kid in enumerate(kids):
                    assert np.allclose(tree.node(2 * n + s, dep + 1).values, kid.values)

    def test_depth_zero_copies(self, dyadic, haar1d):
        c = grid_1d(dyadic, 2, np.arange(4.0))
        tree = decompose(c, haar1d, 0)
        assert tree.depth == 0
        assert np.array_equal(tree.node(0, 0).values, c.values)

    def test_depth_exceeds_level(self, dyadic, haar1d):
        c = grid_1d(dyadic, 2, np.arange(4.0))
        with pytest.raises(DepthExceedsLevelError):
            decompose(c, haar1d, 3)

    def test_inverse_from_leaves(self, corpus_banks, rng):
        for name, fb in corpus_banks.items():
            level = 3 if fb.a == 2 else 2
            depth = level
            c = random_grid(fb.matrix, level, fb.L, rng)
            tree = decompose(c, fb, depth)
            back = reconstruct(tree, level_basis(fb.a, depth, depth))
            assert np.abs(back.values - c.values).max() < 1e-10, name

    def test_parseval_across_leaves(self, corpus_banks, rng):
        for name, fb in corpus_banks.items():
            c = random_grid(fb.matrix, 2, fb.L, rng)
            tree = decompose(c, fb, 2)
            leaf_energy = sum(tree.node(n, 2).energy() for n in range(fb.a**2))
            assert abs(leaf_energy - c.energy()) < 1e-10 * max(1.0, c.energy()), name


class TestReconstruct:
    def test_mixed_depth_basis(self, dyadic, haar1d, rng):
        c = random_grid(dyadic, 4, 1, rng)
        tree = decompose(c, haar1d, 3)
        spec = BasisSpec(a=2, J=3, nodes=((0, 2), (2, 1), (6, 0), (7, 0)))
        back = reconstruct(tree, spec)
        assert np.abs(back.values - c.values).max() < 1e-10

    def test_wavelet_basis(self, dyadic, haar1d, rng):
        c = random_grid(dyadic, 3, 1, rng)
        tree = decompose(c, haar1d, 3)
        back = reconstruct(tree, wavelet_basis(2, 3))
        assert np.abs(back.values - c.values).max() < 1e-10

    def test_root_basis(self, dyadic, haar1d, rng):
        c = random_grid(dyadic, 2, 1, rng)
        tree = decompose(c, haar1d, 2)
        back = reconstruct(tree, BasisSpec(a=2, J=2, nodes=((0, 2),)))
        assert np.abs(back.values - c.values).max() < 1e-10

    def test_inadmissible_rejected(self, dyadic, haar1d, rng):
        tree = decompose(random_grid(dyadic, 2, 1, rng), haar1d, 2)
        with pytest.raises(InadmissibleBasisError):
            reconstruct(tree, BasisSpec(a=2, J=2, nodes=((0, 1), (1, 1), (1, 0))))
        with pytest.raises(InadmissibleBasisError):
            reconstruct(tree, BasisSpec(a=2, J=2, nodes=((0, 1),)))

    def test_missing_node_rejected(self, dyadic, haar1d, rng):
        tree = decompose(random_grid(dyadic, 3, 1, rng), haar1d, 1)
        with pytest.raises(MissingNodeError):
            reconstruct(tree, level_basis(2, 2, 2))

    def test_quincunx_round_trip(self, quincunx, haar_quincunx, rng):
        c = random_grid(quincunx, 4, 1, rng)
        tree = decompose(c, haar_quincunx, 2)
        back = reconstruct(tree, wavelet_basis(2, 2))
        assert np.abs(back.values - c.values).max() < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_round_trip_property(seed, depth):
    # any dyadic data at level 3, any depth <= 3: leaves rebuild the data
    from packetlab.filterbank import complete_bank_haar
    from packetlab.lattice import DilationMatrix

    m = DilationMatrix([[2]])
    fb = complete_bank_haar(m, 1)
    r = np.random.default_rng(seed)
    c = CoefficientGrid(m, digit_set(m), 3, r.standard_normal((1, 8)) * (1 + 1j))
    tree = decompose(c, fb, depth)
    back = reconstruct(tree, level_basis(2, depth, depth))
    assert np.abs(back.values - c.values).max() < 1e-10
