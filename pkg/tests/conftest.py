import numpy as np
import pytest

from core.params import TelegraphParams, V0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_plus():
    """λ = c = 1, départ +, horizon court"""
    return TelegraphParams(lam=1.0, c=1.0, T=5.0, v0=V0.PLUS)


@pytest.fixture
def params_factory():
    def make(lam=1.0, c=1.0, T=1.0, v0=V0.SYMMETRIC):
        return TelegraphParams(lam=lam, c=c, T=T, v0=v0)
    return make
