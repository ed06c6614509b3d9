import numpy as np
import pytest

from fastgates import (
    LaserConfig,
    MathieuParams,
    ThermalState,
    frag_schedule,
    spectrum_from_chi,
)


@pytest.fixture
def paul_chi_spectrum():
    """Abstract two-mode spectrum with the radial Paul-trap splitting."""
    return spectrum_from_chi(-1.4e-2)


@pytest.fixture
def reference_schedule():
    """Fixed six-group schedule used for frozen-value checks."""
    return frag_schedule(0.6, 0.4, 0.3, n=12)


@pytest.fixture
def laser12():
    return LaserConfig(lamb_dicke_eta=0.12)


@pytest.fixture
def thermal01():
    return ThermalState(mean_occupation=0.1)


@pytest.fixture
def mathieu_q02():
    return MathieuParams(a=0.0, q=0.2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
