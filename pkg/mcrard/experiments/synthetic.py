"""
Synthetic high-dimensional regression data and the arbitrary covariate
corruption model used by the Monte-Carlo benchmark.
"""
from dataclasses import dataclass
import logging

import numpy as np

from mcrard.exceptions import DimensionMismatch
from mcrard.io import Dataset

logger = logging.getLogger(__name__)

@dataclass
class SyntheticSpec:
    """
    Attributes:
        n_train (int): training samples
        n_test (int): test samples
        dim (int): D, number of covariates
        n_relevant (int): the first `n_relevant` weights are nonzero
        seed (int): generator seed
    """
    n_train: int = 300
    n_test: int = 300
    dim: int = 500
    n_relevant: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.n_train < 1 or self.n_test < 1 or self.dim < 1:
            raise ValueError("n_train, n_test and dim must be >= 1.")
        if not 0 <= self.n_relevant <= self.dim:
            raise ValueError(f"n_relevant must be in [0, {self.dim}], got "
                             f"{self.n_relevant}.")

@dataclass
class CorruptionSpec:
    """
    Attributes:
        proportion (float): share of covariate cells that get corrupted
        laplace_scale (float): scale b of the additive Laplace noise
        seed (int): seed for the cell choice and the noise
    """
    proportion: float = 0.0
    laplace_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.proportion <= 1.0:
            raise ValueError(f"proportion must be in [0, 1], got {self.proportion}.")
        if not self.laplace_scale > 0:
            raise ValueError(f"laplace_scale must be > 0, got {self.laplace_scale}.")

def draw_solution(spec, rng):
    """
    Standard-normal weights on the first n_relevant indices, exact zeros
    elsewhere.
    """
    w_true = np.zeros(spec.dim)
    w_true[:spec.n_relevant] = rng.standard_normal(spec.n_relevant)
    return w_true

def generate(spec, w_true=None):
    """
    Draws X_train, X_test with i.i.d. N(0, 1) entries and noise-free targets
    t = X w_true.

    Args:
        spec (SyntheticSpec): sizes and seed
        w_true (np.ndarray): optional fixed solution (D,); drawn from the
            seed when None
    Returns:
        (train Dataset, test Dataset, w_true, relevant indices)
    """
    rng = np.random.default_rng(spec.seed)
    if w_true is None:
        w_true = draw_solution(spec, rng)
    else:
        w_true = np.asarray(w_true, dtype=np.float64).ravel()
        if w_true.shape[0] != spec.dim:
            raise DimensionMismatch(f"w_true has {w_true.shape[0]} entries, "
                                    f"spec.dim is {spec.dim}.")
    X_train = rng.standard_normal((spec.n_train, spec.dim))
    X_test = rng.standard_normal((spec.n_test, spec.dim))
    relevant = np.flatnonzero(w_true)
    train = Dataset(X_train, X_train @ w_true)
    test = Dataset(X_test, X_test @ w_true)
    return (train, test, w_true, relevant)

def sample_laplace(rng, scale, size):
    """
    Zero-mean Laplace(scale) draws by inverse CDF, one uniform per sample:
    x = -b sign(u) log(1 - 2|u|), u ~ U[-1/2, 1/2).
    """
    u = rng.random(size) - 0.5
    tail = np.maximum(1.0 - 2.0 * np.abs(u), np.finfo(np.float64).tiny)
    return -scale * np.sign(u) * np.log(tail)

def n_corrupted_cells(proportion, n_cells):
    """
    round(proportion * n_cells), halves rounded up.
    """
    return int(np.floor(proportion * n_cells + 0.5))

def corrupt_covariates(train, spec):
    """
    Adds independent Laplace noise to round(proportion * N * D) distinct,
    uniformly chosen cells of the covariate matrix. Targets are untouched.

    Args:
        train (Dataset): training data only; test data is never corrupted
        spec (CorruptionSpec): <-
    Returns:
        corrupted copy of `train`
    """
    n_cells = train.X.size
    n_corrupt = min(n_corrupted_cells(spec.proportion, n_cells), n_cells)
    if n_corrupt == 0:
        return train.with_covariates(train.X.copy())
    rng = np.random.default_rng(spec.seed)
    cells = rng.choice(n_cells, size=n_corrupt, replace=False)
    X = train.X.copy()
    X.flat[cells] += sample_laplace(rng, spec.laplace_scale, n_corrupt)
    logger.debug(f"corrupted {n_corrupt}/{n_cells} cells "
                 f"(scale={spec.laplace_scale:g})")
    return train.with_covariates(X)
