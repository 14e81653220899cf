import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from packetlab.errors import (
    NonSquareError,
    NotExpandingError,
    SingularOrUnitError,
    SizeOverflowError,
)
from packetlab.lattice import (
    DigitSet,
    DilationMatrix,
    character_sum,
    digit_of,
    digit_set,
    enumerate_representatives,
    reduce_mod,
    validate_dilation,
)

MATRICES = [
    [[2]],
    [[3]],
    [[-2]],
    [[1, 1], [1, -1]],
    [[2, 0], [0, 2]],
    [[1, -2], [1, 1]],
    [[0, 2], [1, 0]],
    [[2, 0, 0], [0, 2, 0], [0, 0, 2]],
]


@pytest.fixture(params=MATRICES, ids=lambda m: str(m))
def any_matrix(request):
    return DilationMatrix(request.param)


class TestValidate:
    def test_accepts_dyadic(self):
        m = validate_dilation([[2]])
        assert m.dim == 1 and m.det_abs == 2

    def test_accepts_quincunx(self):
        m = validate_dilation([[1, 1], [1, -1]])
        assert m.det_abs == 2
        assert np.array_equal(m.B, np.array([[1, 1], [1, -1]]))

    def test_rejects_identity(self):
        with pytest.raises(SingularOrUnitError):
            validate_dilation([[1, 0], [0, 1]])

    def test_rejects_singular(self):
        with pytest.raises(SingularOrUnitError):
            validate_dilation([[2, 0], [2, 0]])

    def test_rejects_unit_eigenvalue(self):
        # determinant 2 but one eigenvalue equals 1
        with pytest.raises(NotExpandingError):
            validate_dilation([[1, 1], [0, 2]])

    def test_rejects_non_square(self):
        with pytest.raises(NonSquareError):
            validate_dilation([[1, 2, 3], [4, 5, 6]])

    def test_rejects_non_integer(self):
        with pytest.raises(NonSquareError):
            validate_dilation([[1.5, 0], [0, 2]])

    def test_accepts_integral_floats(self):
        m = validate_dilation(np.array([[2.0]]))
        assert m.det == 2


class TestDigitSet:
    def test_dyadic_digits(self, dyadic):
        assert digit_set(dyadic).digits == ((0,), (1,))

    def test_quincunx_digits(self, quincunx):
        assert digit_set(quincunx).digits == ((0, 0), (1, 0))
        assert digit_set(quincunx, for_transpose=True).digits == ((0, 0), (1, 0))

    def test_separable_digits(self, separable2d):
        assert digit_set(separable2d).digits == ((0, 0), (1, 0), (0, 1), (1, 1))

    def test_transpose_differs_when_it_must(self):
        # (1,0) lies in M^t Z^2 here, so it cannot appear as a nonzero digit
        m = DilationMatrix([[0, 2], [1, 0]])
        ds = digit_set(m, for_transpose=True)
        assert set(ds.digits) != {(0, 0), (1, 0)}
        r, q = digit_of((1, 0), ds)
        assert r == 0 and np.array_equal(m.B @ q, [1, 0])

    def test_zero_first_and_count(self, any_matrix):
        for ft in (False, True):
            ds = digit_set(any_matrix, for_transpose=ft)
            assert len(ds.digits) == any_matrix.det_abs
            assert ds.digits[0] == (0,) * any_matrix.dim
            # pairwise non-congruent: each digit reduces to its own index
            for i, v in enumerate(ds.digits):
                r, q = digit_of(v, ds)
                assert r == i and not np.any(q)

    def test_translate_still_valid(self, any_matrix):
        ds = digit_set(any_matrix)
        for mu in ds.digits:
            shifted = [tuple(np.array(v) - np.array(mu)) for v in ds.digits]
            again = DigitSet.from_vectors(any_matrix, False, shifted)
            assert set(again.digits) == set(shifted)

    def test_rejects_coset_collision(self, dyadic):
        with pytest.raises(ValueError):
            DigitSet(dyadic, False, ((0,), (2,)))

    def test_rejects_missing_zero(self, dyadic):
        with pytest.raises(ValueError):
            DigitSet(dyadic, False, ((1,), (2,)))


class TestDigitOf:
    def test_dyadic_values(self, dyadic):
        ds = digit_set(dyadic)
        assert digit_of(7, ds) == (1, 3)
        r, q = digit_of(-1, ds)
        assert r == 1 and q[0] == -1

    def test_quincunx_value(self, quincunx):
        ds = digit_set(quincunx)
        r, q = digit_of((3, 1), ds)
        assert r == 0 and np.array_equal(q, [2, 1])

    @given(st.integers(-10**6, 10**6))
    def test_reconstructs_dyadic(self, k):
        ds = digit_set(DilationMatrix([[2]]))
        r, q = digit_of(k, ds)
        assert ds.digits[r][0] + 2 * q[0] == k

    def test_reconstructs_everywhere(self, any_matrix, rng):
        for ft in (False, True):
            ds = digit_set(any_matrix, for_transpose=ft)
            m = any_matrix.side(ft)
            for _ in range(50):
                k = rng.integers(-50, 50, size=any_matrix.dim)
                r, q = digit_of(k, ds)
                assert np.array_equal(np.array(ds.digits[r]) + m @ q, k)


class TestEnumerate:
    def test_dyadic_level3(self, dyadic):
        reps = enumerate_representatives(dyadic, digit_set(dyadic), 3)
        assert reps[:, 0].tolist() == list(range(8))

    def test_level0(self, quincunx):
        reps = enumerate_representatives(quincunx, digit_set(quincunx), 0)
        assert reps.shape == (1, 2) and not reps.any()

    def test_round_trip(self, any_matrix):
        ds = digit_set(any_matrix)
        level = 2 if any_matrix.dim < 3 else 1
        reps = enumerate_representatives(any_matrix, ds, level)
        assert len(reps) == any_matrix.det_abs**level
        for idx, row in enumerate(reps):
            assert reduce_mod(row, level, any_matrix, ds) == idx

    def test_size_limit(self, dyadic, monkeypatch):
        monkeypatch.setenv("PACKETLAB_MAX_CELLS", "8")
        ds = digit_set(dyadic)
        enumerate_representatives(dyadic, ds, 3)
        with pytest.raises(SizeOverflowError):
            enumerate_representatives(dyadic, ds, 4)


class TestReduceMod:
    def test_spec_values(self, dyadic):
        ds = digit_set(dyadic)
        assert reduce_mod(9, 3, dyadic, ds) == 1
        assert reduce_mod(-1, 2, dyadic, ds) == 3
        assert reduce_mod(17, 0, dyadic, ds) == 0

    @given(st.integers(-10**4, 10**4), st.integers(0, 8))
    @settings(max_examples=60)
    def test_congruence(self, k, level):
        m = DilationMatrix([[2]])
        ds = digit_set(m)
        idx = reduce_mod(k, level, m, ds)
        assert 0 <= idx < 2**level
        # representative and k differ by a multiple of 2^level
        rep = enumerate_representatives(m, ds, level)[idx, 0]
        assert (k - rep) % 2**level == 0


class TestCharacterSum:
    def test_pattern(self, any_matrix):
        ds_a = digit_set(any_matrix)
        ds_b = digit_set(any_matrix, for_transpose=True)
        a = any_matrix.det_abs
        for i, nu in enumerate(ds_a.digits):
            value = character_sum(nu, any_matrix, ds_b)
            target = a if i == 0 else 0.0
            assert abs(value - target) < 1e-12

    def test_lattice_vector(self, quincunx):
        ds_b = digit_set(quincunx, for_transpose=True)
        nu = quincunx.A @ np.array([3, -2])
        assert abs(character_sum(nu, quincunx, ds_b) - 2) < 1e-12
