from dataclasses import dataclass
import logging

import numpy as np

from mcrard.exceptions import DimensionMismatch, EmptyDataset
from .dataset import Dataset

logger = logging.getLogger(__name__)

@dataclass
class StandardizationParams:
    """
    Per-feature affine map x -> (x - means) / scales fitted on training data.
    """
    means: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=np.float64).ravel()
        self.scales = np.asarray(self.scales, dtype=np.float64).ravel()
        if self.means.shape != self.scales.shape:
            raise DimensionMismatch("means and scales must have the same length.")
        if np.any(self.scales <= 0):
            raise ValueError("scales must be strictly positive.")

    @classmethod
    def identity(cls, n_features):
        return cls(np.zeros(n_features), np.ones(n_features))

    def to_dict(self):
        return {"means": self.means.tolist(), "scales": self.scales.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["means"], d["scales"])

def standardize(train):
    """
    Z-scores every non-constant column (population sd); constant columns are
    only centered and get scale 1.

    Args:
        train (Dataset): N >= 2
    Returns:
        (standardized Dataset, StandardizationParams)
    """
    if train.n_samples < 2:
        raise EmptyDataset("Standardization needs at least 2 samples.")
    means = train.X.mean(axis=0)
    scales = train.X.std(axis=0)
    constant = np.ptp(train.X, axis=0) == 0
    scales[constant] = 1.0
    if np.any(constant):
        logger.debug(f"{int(constant.sum())} constant column(s) centered only")
    params = StandardizationParams(means, scales)
    return (apply_standardization(train, params), params)

def apply_standardization(data, params):
    """
    Applies training-set standardization to (held-out) data.
    """
    if data.n_features != params.means.shape[0]:
        raise DimensionMismatch(f"Data has {data.n_features} features, params "
                                f"were fit on {params.means.shape[0]}.")
    return data.with_covariates((data.X - params.means) / params.scales)

def destandardize_weights(weights, params):
    """
    Converts weights learned on standardized covariates to original units.

    Returns:
        (weights in original units, additive offset from the centering)
    """
    weights_orig = np.asarray(weights) / params.scales
    offset = -float(np.dot(weights_orig, params.means))
    return (weights_orig, offset)

def append_intercept(data):
    """
    Appends a constant-1 column named `intercept` as the last feature.
    """
    X = np.hstack([data.X, np.ones((data.n_samples, 1))])
    return Dataset(X, data.t, data.names() + ["intercept"])

def normalize_target_01(t):
    """
    Affine map of `t` onto [0, 1]. A constant vector maps to zeros.

    Returns:
        (normalized t, min, max)
    """
    t = np.asarray(t, dtype=np.float64).ravel()
    if t.size == 0:
        raise ValueError("t must be nonempty")
    t_min, t_max = float(np.min(t)), float(np.max(t))
    if t_max == t_min:
        return (np.zeros_like(t), t_min, t_max)
    return ((t - t_min) / (t_max - t_min), t_min, t_max)

def denormalize_target_01(t_norm, t_min, t_max):
    """
    Inverse of `normalize_target_01`.
    """
    t_norm = np.asarray(t_norm, dtype=np.float64)
    return t_norm * (t_max - t_min) + t_min
