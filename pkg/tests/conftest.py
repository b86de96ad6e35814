import numpy as np
import pytest

from jointruin.claims import Exponential, RegVaryingClaim
from jointruin.model import InitialReserves, ModelParams

REF = ModelParams(r=0.05, lam=1.0, c1=2.0, c2=1.0, delta1=0.5, delta2=0.5)


@pytest.fixture
def ref_params():
    return REF


@pytest.fixture
def exp_claim():
    return Exponential(1.0)


@pytest.fixture(scope="session")
def rv_claim():
    return RegVaryingClaim(alpha=1.5, beta=1.0)


@pytest.fixture
def ref_reserves():
    return InitialReserves(1.0, 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
