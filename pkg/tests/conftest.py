import numpy as np
import pytest

from fracheat.frames import euclidean, grushin, heisenberg
from fracheat.generator import assemble, spectral_decompose
from fracheat.spacetime import TimeCircle


@pytest.fixture(scope="session")
def dec_e1():
    return spectral_decompose(assemble(euclidean(1, n=32)))


@pytest.fixture(scope="session")
def dec_e2():
    return spectral_decompose(assemble(euclidean(2, n=8)))


@pytest.fixture(scope="session")
def dec_grushin():
    return spectral_decompose(assemble(grushin(16)))


@pytest.fixture(scope="session")
def dec_heis():
    return spectral_decompose(assemble(heisenberg(8)))


@pytest.fixture(scope="session")
def circle16():
    return TimeCircle(period=1.0, samples=16)
