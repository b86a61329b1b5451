"""Shared fixtures for the test suite."""
import numpy as np
import pytest

from models import Fnn, SympNet
from phase import Harmonic, Kepler, LotkaVolterra, Pendulum


@pytest.fixture
def pendulum():
    return Pendulum()


@pytest.fixture
def lotka_volterra():
    return LotkaVolterra()


@pytest.fixture
def kepler():
    return Kepler()


@pytest.fixture
def harmonic():
    return Harmonic()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def randomize(model, rng, scale=0.5):
    """Overwrite every parameter with uniform noise in [-scale, scale]."""
    for value in model.params.values():
        value[...] = rng.uniform(-scale, scale, size=value.shape)
    return model


@pytest.fixture
def random_sympnet(rng):
    def _make(d=1, k=3, n=3, h=0.5, **kwargs):
        return randomize(SympNet(d=d, h=h, k=k, n=n, **kwargs), rng)
    return _make


@pytest.fixture
def small_fnn(rng):
    return randomize(Fnn(d=1, hidden=(5, 5), seed=3), rng)


@pytest.fixture
def randomize_params(rng):
    def _randomize(model, scale=0.5):
        return randomize(model, rng, scale)
    return _randomize
