import numpy as np
import pytest

from qhydro import Grid1D, PhysParams


@pytest.fixture
def ring():
    return Grid1D(64, 2.0 * np.pi)


@pytest.fixture
def unit_gp():
    # hbar = m = rho0 = 1 and c_s = 1
    return PhysParams(scatter_len=1.0 / (4.0 * np.pi))
