import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from liefloquet.algebra import preset_algebra
from liefloquet.milne_pinney import mp_curve, mp_params, mp_system


@pytest.fixture(scope="session")
def sp1r():
    return preset_algebra("sp1R")


@pytest.fixture(scope="session")
def so3():
    return preset_algebra("so3")


@pytest.fixture(scope="session")
def heis():
    return preset_algebra("heisenberg3")


@pytest.fixture(scope="session")
def mp_default_params():
    return mp_params()  # c = 1, omega = 1 + 0.1 cos t


@pytest.fixture(scope="session")
def mp_default_system(mp_default_params):
    return mp_system(mp_default_params)


@pytest.fixture(scope="session")
def mp_default_curve(mp_default_params):
    return mp_curve(mp_default_params)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
