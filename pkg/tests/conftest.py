import numpy as np
import pandas as pd
import pytest

from mcrard.io import Dataset

TRUE_WEIGHTS = np.array([1.5, -2.0, 0.0, 0.0, 0.8])


def make_regression(n_samples=60, weights=TRUE_WEIGHTS, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_samples, len(weights)))
    t = X @ weights + noise * rng.standard_normal(n_samples)
    return Dataset(X, t)


def write_dataset_csv(path, data, target_column="target"):
    df = pd.DataFrame(data.X, columns=data.names())
    df[target_column] = data.t
    df.to_csv(path, index=False, float_format="%.17g")
    return str(path)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def noise_free():
    """N=60, D=5, t = X w exactly, two irrelevant columns."""
    return make_regression()


@pytest.fixture
def sparse_data():
    """N=100, D=20, five relevant features, small Gaussian noise."""
    weights = np.zeros(20)
    weights[:5] = [2.0, -1.5, 1.0, 0.8, -1.2]
    return make_regression(100, weights, noise=0.05, seed=3), weights


@pytest.fixture
def toy_csv(tmp_path, noise_free):
    return write_dataset_csv(tmp_path / "toy.csv", noise_free)


@pytest.fixture
def regression():
    """Factory for noise-free toy regressions of a given size."""
    return make_regression
