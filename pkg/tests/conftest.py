import numpy as np
import pytest

from scarsim.hilbert import canonical_states, enumerate_blockaded
from scarsim.lattice import PhysicalParams, build_lattice


@pytest.fixture(scope="session")
def params51():
    return PhysicalParams.from_mhz(4.2, 51.0)


@pytest.fixture(scope="session")
def chain9(params51):
    lat = build_lattice("chain", 9)
    basis = enumerate_blockaded(lat)
    return lat, basis


def unit_state(basis, state):
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.index_of(state)] = 1.0
    return psi


@pytest.fixture(scope="session")
def chain9_states(chain9):
    lat, basis = chain9
    af1, af2, ggg = canonical_states(lat)
    return af1, af2, ggg
