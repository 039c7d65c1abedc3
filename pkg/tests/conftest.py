import numpy as np
import pytest

from shared.models import IDENTITY_SCALE, Dataset, SmootherKind, SmootherSpec, SyntheticSpec
from datasets import generate_synthetic


def make_dataset(X, Y) -> Dataset:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return Dataset(X=X, Y=Y, column_scales=[IDENTITY_SCALE] * X.shape[1])


def series_spec(d: int = 3) -> SmootherSpec:
    return SmootherSpec(kind=SmootherKind.ORTHOGONAL_SERIES, truncation=d)


def loclin_spec(h: float = 0.15) -> SmootherSpec:
    return SmootherSpec(kind=SmootherKind.LOCAL_LINEAR, bandwidth=h)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture
def synthetic_small():
    return generate_synthetic(SyntheticSpec(n=100, p=8, noise_sd=0.5, seed=3))


@pytest.fixture
def binary_data(rng):
    n = 200
    X = rng.uniform(size=(n, 4))
    eta = 3.0 * (X[:, 0] - 0.5) + 2.0 * np.sin(2 * np.pi * X[:, 1])
    Y = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    return make_dataset(X, Y)
