import numpy as np
import pytest

from packetlab.filterbank import FilterBank, complete_bank_haar
from packetlab.lattice import DilationMatrix, digit_set

SQ2 = 1.0 / np.sqrt(2.0)


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))[None, :].conj()


@pytest.fixture(scope="session")
def dyadic():
    return DilationMatrix([[2]])


@pytest.fixture(scope="session")
def triadic():
    return DilationMatrix([[3]])


@pytest.fixture(scope="session")
def quincunx():
    return DilationMatrix([[1, 1], [1, -1]])


@pytest.fixture(scope="session")
def separable2d():
    return DilationMatrix([[2, 0], [0, 2]])


@pytest.fixture(scope="session")
def det3_2d():
    # |det| = 3, eigenvalues 1 +/- i sqrt(2)
    return DilationMatrix([[1, -2], [1, 1]])


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260822)


def pair(m):
    return digit_set(m, for_transpose=False), digit_set(m, for_transpose=True)


@pytest.fixture(scope="session")
def haar1d(dyadic):
    return complete_bank_haar(dyadic, 1)


@pytest.fixture(scope="session")
def lazy1d(dyadic):
    return complete_bank_haar(dyadic, 1, unitary=np.eye(2))


@pytest.fixture(scope="session")
def haar_quincunx(quincunx):
    return complete_bank_haar(quincunx, 1)


@pytest.fixture(scope="session")
def haar_triadic(triadic):
    return complete_bank_haar(triadic, 1)


@pytest.fixture(scope="session")
def bank_l2(dyadic):
    # multiplicity 2, one tap per digit, fixed random unitary
    u = random_unitary(4, np.random.default_rng(7))
    return complete_bank_haar(dyadic, 2, unitary=u)


@pytest.fixture(scope="session")
def corpus_banks(haar1d, lazy1d, haar_quincunx, haar_triadic, bank_l2):
    return {
        "haar1d": haar1d,
        "lazy1d": lazy1d,
        "haar_quincunx": haar_quincunx,
        "haar_triadic": haar_triadic,
        "bank_l2": bank_l2,
    }


@pytest.fixture(scope="session")
def haar_lowpass_only(dyadic):
    return FilterBank(dyadic, 1, {0: {(0, 0): {0: SQ2, 1: SQ2}}})
