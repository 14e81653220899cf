import numpy as np
import pytest

from conftest import SQ2, random_unitary
from packetlab.errors import (
    ChannelOutOfRangeError,
    LowPassNotIsometricError,
    NotUnitaryError,
)
from packetlab.filterbank import (
    FilterBank,
    check_splitting_exact,
    check_splitting_grid,
    complete_bank_grid,
    complete_bank_haar,
    eval_symbol,
    frequency_grid,
)
from packetlab.lattice import DilationMatrix


class TestSymbols:
    def test_haar_endpoint_values(self, haar1d):
        assert abs(eval_symbol(haar1d, 0, 0.0).values[0, 0] - 1.0) < 1e-14
        assert abs(eval_symbol(haar1d, 0, np.pi).values[0, 0]) < 1e-14

    def test_haar_generic_point(self, haar1d):
        xi = 0.7
        want = (1.0 + np.exp(-1j * xi)) / 2.0
        assert abs(eval_symbol(haar1d, 0, xi).values[0, 0] - want) < 1e-14

    def test_absent_channel_is_zero(self, dyadic):
        fb = FilterBank(dyadic, 1, {0: {(0, 0): {0: SQ2, 1: SQ2}}})
        assert np.all(eval_symbol(fb, 1, 0.3).values == 0)

    def test_out_of_range_channel(self, haar1d):
        with pytest.raises(ChannelOutOfRangeError):
            eval_symbol(haar1d, 2, 0.0)
        with pytest.raises(ChannelOutOfRangeError):
            eval_symbol(haar1d, -1, 0.0)

    def test_quincunx_symbol_shape(self, haar_quincunx):
        sym = eval_symbol(haar_quincunx, 1, (0.3, -0.2))
        assert sym.values.shape == (1, 1)


class TestExactCheck:
    def test_haar_passes(self, haar1d):
        rep = check_splitting_exact(haar1d)
        assert rep.exact_pass and rep.max_defect_exact < 1e-12

    def test_lazy_passes(self, lazy1d):
        assert check_splitting_exact(lazy1d).exact_pass

    def test_unnormalized_defect_one(self, dyadic):
        fb = FilterBank(dyadic, 1, {0: {(0, 0): {0: 1.0, 1: 1.0}}})
        rep = check_splitting_exact(fb)
        assert not rep.exact_pass
        assert abs(rep.max_defect_exact - 1.0) < 1e-12

    def test_scaled_haar_defect_three(self, dyadic):
        fb = FilterBank(dyadic, 1, {
            0: {(0, 0): {0: 2 * SQ2, 1: 2 * SQ2}},
            1: {(0, 0): {0: 2 * SQ2, 1: -2 * SQ2}},
        })
        rep = check_splitting_exact(fb)
        assert abs(rep.max_defect_exact - 3.0) < 1e-12

    def test_corpus_passes(self, corpus_banks):
        for name, fb in corpus_banks.items():
            rep = check_splitting_exact(fb)
            assert rep.exact_pass, name


class TestGridCheck:
    def test_haar_passes(self, haar1d):
        rep = check_splitting_grid(haar1d, grid_n=32)
        assert rep.grid_pass and rep.max_defect_grid < 1e-10
        assert rep.grid_size == 32

    def test_corpus_passes(self, corpus_banks):
        for name, fb in corpus_banks.items():
            n = 16 if fb.dim > 1 else 64
            rep = check_splitting_grid(fb, grid_n=n)
            assert rep.grid_pass, name

    def test_grid_defect_tracks_exact_defect(self, dyadic, corpus_banks, rng):
        # perturb one tap; the grid defect stays within aL x the exact defect
        for fb in corpus_banks.values():
            pert = _perturb_one_tap(fb, rng)
            ex = check_splitting_exact(pert).max_defect_exact
            gr = check_splitting_grid(pert, grid_n=8).max_defect_grid
            assert gr <= pert.a * pert.L * ex + 1e-10
            assert ex > 1e-12 and gr > 1e-10

    def test_phase_rotation_preserves_both_checks(self, haar1d, dyadic):
        phase = np.exp(0.7j)
        fb = FilterBank(dyadic, 1, {
            0: {(0, 0): {0: SQ2, 1: SQ2}},
            1: {(0, 0): {0: SQ2 * phase, 1: -SQ2 * phase}},
        })
        assert check_splitting_exact(fb).exact_pass
        assert check_splitting_grid(fb, grid_n=32).grid_pass


def _perturb_one_tap(fb, rng):
    channels = {}
    for r in fb.present_channels:
        entries = {}
        for (row, col), (keys, vals) in fb.entries(r):
            entries[(row, col)] = {tuple(k): v for k, v in zip(keys.tolist(), vals)}
        channels[r] = entries
    r = fb.present_channels[int(rng.integers(len(fb.present_channels)))]
    entry_keys = list(channels[r])
    row, col = entry_keys[int(rng.integers(len(entry_keys)))]
    taps = channels[r][(row, col)]
    k = list(taps)[int(rng.integers(len(taps)))]
    taps[k] = taps[k] + 0.05 * (1.0 + 0.3j)
    return FilterBank(fb.matrix, fb.L, channels, fb.digits_a, fb.digits_b)


HAAR_CONFIGS = [
    ([[2]], 1), ([[2]], 2), ([[3]], 1), ([[3]], 2),
    ([[1, 1], [1, -1]], 1), ([[1, 1], [1, -1]], 2),
    ([[1, -2], [1, 1]], 1), ([[1, -2], [1, 1]], 2),
]


class TestHaarCompletion:
    def test_default_is_classical_pair(self, haar1d):
        k0, v0 = haar1d.taps(0, 0, 0)
        k1, v1 = haar1d.taps(1, 0, 0)
        assert k0[:, 0].tolist() == [0, 1] and k1[:, 0].tolist() == [0, 1]
        assert np.allclose(v0, [SQ2, SQ2]) and np.allclose(v1, [SQ2, -SQ2])

    def test_identity_gives_lazy(self, lazy1d):
        for r in range(2):
            keys, vals = lazy1d.taps(r, 0, 0)
            assert keys[:, 0].tolist() == [r] and np.allclose(vals, [1.0])

    def test_quincunx_default_taps(self, haar_quincunx):
        keys, vals = haar_quincunx.taps(1, 0, 0)
        assert keys.tolist() == [[0, 0], [1, 0]]
        assert np.allclose(vals, [SQ2, -SQ2])

    def test_rejects_non_unitary(self, dyadic):
        with pytest.raises(NotUnitaryError):
            complete_bank_haar(dyadic, 1, unitary=np.array([[1.0, 0.0], [0.0, 1.1]]))
        with pytest.raises(NotUnitaryError):
            complete_bank_haar(dyadic, 2, unitary=np.eye(3))

    @pytest.mark.parametrize("mat,L", HAAR_CONFIGS, ids=lambda v: str(v))
    def test_random_unitaries_split(self, mat, L):
        m = DilationMatrix(mat)
        rng = np.random.default_rng(hash((str(mat), L)) % 2**32)
        n = m.det_abs * L
        for _ in range(100):
            fb = complete_bank_haar(m, L, unitary=random_unitary(n, rng))
            assert check_splitting_exact(fb).max_defect_exact < 1e-12


class TestGridCompletion:
    def test_haar_lowpass_span(self, haar_lowpass_only):
        sb = complete_bank_grid(haar_lowpass_only, grid_n=32)
        assert sb.unitarity_defect() < 1e-10
        # completed high-pass row spans the classical QMF partner pointwise
        for i, xi in enumerate(sb.points[:, 0]):
            got = sb.h[i, 1, :]
            ref = np.array([(1 - np.exp(-1j * xi)) / 2,
                            (1 - np.exp(-1j * (xi + np.pi))) / 2])
            assert abs(abs(np.vdot(got, ref)) - 1.0) < 1e-8

    def test_lazy_lowpass(self, dyadic):
        fb = FilterBank(dyadic, 1, {0: {(0, 0): {0: 1.0}}})
        sb = complete_bank_grid(fb, grid_n=16)
        assert sb.unitarity_defect() < 1e-10

    def test_rejects_zero_lowpass(self, dyadic):
        fb = FilterBank(dyadic, 1, {0: {(0, 0): {0: 0.0 + 0j, 1: 0.0}}})
        with pytest.raises(LowPassNotIsometricError):
            complete_bank_grid(fb, grid_n=8)

    def test_multiplicity_two(self, dyadic, bank_l2):
        entries = {}
        for row in range(2):
            for col in range(2):
                keys, vals = bank_l2.taps(0, row, col)
                if len(keys):
                    entries[(row, col)] = {tuple(k): v for k, v in zip(keys.tolist(), vals)}
        fb = FilterBank(dyadic, 2, {0: entries})
        sb = complete_bank_grid(fb, grid_n=16)
        assert sb.unitarity_defect() < 1e-10
        assert sb.h.shape == (16, 4, 4)

    def test_quincunx(self, quincunx):
        fb = FilterBank(quincunx, 1, {0: {(0, 0): {(0, 0): SQ2, (1, 0): SQ2}}})
        sb = complete_bank_grid(fb, grid_n=8)
        assert sb.unitarity_defect() < 1e-10
        assert sb.points.shape == (64, 2)


def test_frequency_grid_shape():
    g = frequency_grid(2, 4)
    assert g.shape == (16, 2)
    assert g.min() == -np.pi and g.max() < np.pi
