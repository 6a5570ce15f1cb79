from dataclasses import dataclass, field
from typing import List, Optional
import logging

import numpy as np

from mcrard.exceptions import DimensionMismatch, AllFeaturesPruned
from mcrard.io.preprocess import StandardizationParams, destandardize_weights
from mcrard.linalg import spd_solve
from mcrard.utils import save_json, load_json

logger = logging.getLogger(__name__)

# below this squared weight the fast relevance update is treated as undefined
W2_FLOOR = 1e-24

@dataclass
class FittedModel:
    """
    Output of either estimator.

    Attributes:
        algorithm (str): "lsr-ard" or "mcr-ard"
        weights (np.ndarray): (D,) in the space the model was fit in, zero
            wherever `active_mask` is False
        active_mask (np.ndarray): (D,) bool
        relevance (np.ndarray): (D,) last relevance value per feature (for a
            pruned feature, the value that crossed the threshold)
        noise_variance (float): sigma^2, LSR-ARD only
        bandwidth (float): kernel bandwidth h, MCR-ARD only
        n_iters (int): outer iterations run
        converged (bool): whether ||dw||_inf < w_tol was reached
        objective_trace (list): per-iteration objective (diagnostic only)
        feature_names, standardization, target_offset, has_intercept:
            preprocessing recorded by the fit pipeline so predictions can be
            made from raw covariates
    """
    algorithm: str
    weights: np.ndarray
    active_mask: np.ndarray
    relevance: np.ndarray
    noise_variance: Optional[float] = None
    bandwidth: Optional[float] = None
    n_iters: int = 0
    converged: bool = False
    objective_trace: List[float] = field(default_factory=list)
    feature_names: Optional[List[str]] = None
    standardization: Optional[StandardizationParams] = None
    target_offset: float = 0.0
    has_intercept: bool = False

    @property
    def n_features(self):
        return self.weights.shape[0]

    @property
    def active_indices(self):
        return np.flatnonzero(self.active_mask)

    def original_weights(self):
        """
        Covariate weights (intercept excluded) in original units, plus the
        additive offset of the prediction.
        """
        n_cov = self.n_features - int(self.has_intercept)
        weights = self.weights[:n_cov]
        offset = self.target_offset
        if self.has_intercept:
            offset += float(self.weights[-1])
        if self.standardization is not None:
            weights, shift = destandardize_weights(weights, self.standardization)
            offset += shift
        return (np.asarray(weights, dtype=np.float64), offset)

def a_step(w_star, s2, a_prev):
    """
    Relevance update. Uses the fast form (1 - a_prev s2) / w^2 when it is
    positive and w^2 >= 1e-24, otherwise 1 / (w^2 + s2).

    Args:
        w_star (np.ndarray): weight mode (or posterior mean)
        s2 (np.ndarray): marginal variances, > 0
        a_prev (np.ndarray): relevance values the variances were computed with
    Returns:
        np.ndarray of strictly positive relevance values
    """
    w2 = np.asarray(w_star, dtype=np.float64) ** 2
    s2 = np.asarray(s2, dtype=np.float64)
    gamma = 1.0 - np.asarray(a_prev, dtype=np.float64) * s2
    a_new = 1.0 / (w2 + s2)
    fast_ok = (gamma > 0) & (w2 >= W2_FLOOR)
    a_new[fast_ok] = gamma[fast_ok] / w2[fast_ok]
    return a_new

def prune(active_mask, relevance, a_max, protected=None):
    """
    Deactivates every active feature whose relevance reached `a_max`.
    Features listed in `protected` are never pruned.

    Returns:
        (new active mask, indices pruned this round)
    """
    crossed = active_mask & (relevance >= a_max)
    if protected is not None:
        crossed[np.asarray(protected, dtype=int)] = False
    newly = np.flatnonzero(crossed)
    active_mask = active_mask.copy()
    active_mask[newly] = False
    if not active_mask.any():
        raise AllFeaturesPruned(f"All features pruned (a_max={a_max:g}).")
    return (active_mask, newly)

def ridge_init(X, t):
    """
    Starting weights (X^T X + I)^{-1} X^T t, matching a = 1 everywhere.
    """
    return spd_solve(X.T @ X + np.eye(X.shape[1]), X.T @ t)

def check_protected(protected, n_features):
    if protected is None:
        return None
    protected = np.unique(np.asarray(protected, dtype=int))
    if protected.size and (protected.min() < 0 or protected.max() >= n_features):
        raise DimensionMismatch(f"Protected indices out of range for D={n_features}.")
    return protected

def predict(model, X):
    """
    X w, with X in the space the model was fit in.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(f"X has {X.shape[1]} columns, model has "
                                f"{model.n_features} weights.")
    return X @ model.weights

def predict_raw(model, X_raw):
    """
    Prediction from covariates in original units, replaying the recorded
    standardization, intercept column and target centering.
    """
    X_raw = np.atleast_2d(np.asarray(X_raw, dtype=np.float64))
    n_cov = model.n_features - int(model.has_intercept)
    if X_raw.shape[1] != n_cov:
        raise DimensionMismatch(f"X has {X_raw.shape[1]} columns, model expects "
                                f"{n_cov}.")
    X = X_raw
    if model.standardization is not None:
        X = (X - model.standardization.means) / model.standardization.scales
    if model.has_intercept:
        X = np.hstack([X, np.ones((X.shape[0], 1))])
    return predict(model, X) + model.target_offset

def model_to_dict(model):
    """
    JSON layout of a fitted model; field names are stable.
    """
    weights_orig, offset = model.original_weights()
    return {
        "algorithm": model.algorithm,
        "feature_names": model.feature_names,
        "weights": weights_orig.tolist(),
        "offset": offset,
        "weights_standardized": model.weights.tolist(),
        "active_indices": model.active_indices.tolist(),
        "relevance": model.relevance.tolist(),
        "bandwidth": model.bandwidth,
        "noise_variance": model.noise_variance,
        "n_iters": model.n_iters,
        "converged": model.converged,
        "objective_trace": list(model.objective_trace),
        "standardization": None if model.standardization is None \
                           else model.standardization.to_dict(),
        "target_offset": model.target_offset,
        "has_intercept": model.has_intercept,
    }

def model_from_dict(d):
    weights = np.asarray(d["weights_standardized"], dtype=np.float64)
    active_mask = np.zeros(weights.shape[0], dtype=bool)
    active_mask[np.asarray(d["active_indices"], dtype=int)] = True
    standardization = d.get("standardization")
    return FittedModel(algorithm=d["algorithm"], weights=weights,
                       active_mask=active_mask,
                       relevance=np.asarray(d["relevance"], dtype=np.float64),
                       noise_variance=d.get("noise_variance"),
                       bandwidth=d.get("bandwidth"),
                       n_iters=int(d.get("n_iters", 0)),
                       converged=bool(d.get("converged", False)),
                       objective_trace=list(d.get("objective_trace", [])),
                       feature_names=d.get("feature_names"),
                       standardization=None if standardization is None \
                           else StandardizationParams.from_dict(standardization),
                       target_offset=float(d.get("target_offset", 0.0)),
                       has_intercept=bool(d.get("has_intercept", False)))

def save_model(model, json_path):
    save_json(model_to_dict(model), json_path)
    logger.info(f"Saving {json_path}...")

def load_model(json_path):
    return model_from_dict(load_json(json_path))
