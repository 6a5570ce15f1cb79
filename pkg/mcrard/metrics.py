from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mcrard.exceptions import DimensionMismatch, UndefinedCorrelation, \
                              EmptyRelevantSet, AllZeroWeights, KTooLarge, \
                              NonPositiveBandwidth

@dataclass
class MetricsRecord:
    """
    Evaluation of one fitted model. `correlation` is None when it is
    undefined (constant prediction); it is never reported as 0.
    """
    correlation: Optional[float]
    rmse: float
    n_selected: int
    recall: Optional[float] = None
    contribution: Optional[np.ndarray] = field(default=None)

    def to_dict(self):
        out = {"correlation": self.correlation, "rmse": self.rmse,
               "n_selected": self.n_selected, "recall": self.recall}
        if self.contribution is not None:
            out["contribution"] = np.asarray(self.contribution).tolist()
        return out

def _paired(pred, truth):
    pred = np.asarray(pred, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if pred.shape != truth.shape or pred.size == 0:
        raise DimensionMismatch(f"Need equal nonzero lengths, got {pred.size} "
                                f"and {truth.size}.")
    return (pred, truth)

def correlation(pred, truth):
    """
    Pearson correlation Cov(pred, truth) / sqrt(Var(pred) Var(truth)), with
    population moments in numerator and denominator.

    Raises:
        UndefinedCorrelation: if either vector has zero variance
    """
    pred, truth = _paired(pred, truth)
    dp = pred - pred.mean()
    dt = truth - truth.mean()
    var_p, var_t = np.mean(dp ** 2), np.mean(dt ** 2)
    if var_p == 0 or var_t == 0:
        raise UndefinedCorrelation("Correlation is undefined for a constant vector.")
    corr = np.mean(dp * dt) / np.sqrt(var_p * var_t)
    return float(np.clip(corr, -1.0, 1.0))

def rmse(pred, truth):
    """
    sqrt(||pred - truth||^2 / N)
    """
    pred, truth = _paired(pred, truth)
    return float(np.sqrt(np.mean((pred - truth) ** 2)))

def empirical_correntropy(a, b, h):
    """
    Sample correntropy (1/N) sum exp(-(a_n - b_n)^2 / 2h) between two
    vectors; 1 exactly when they coincide.
    """
    if h <= 0:
        raise NonPositiveBandwidth(f"Bandwidth must be > 0, got {h}.")
    a, b = _paired(a, b)
    return float(np.mean(np.exp(-(a - b) ** 2 / (2.0 * h))))

def selection_recall(selected, relevant):
    """
    |selected & relevant| / |relevant|
    """
    relevant = set(int(i) for i in relevant)
    if len(relevant) == 0:
        raise EmptyRelevantSet("The relevant set must be nonempty.")
    selected = set(int(i) for i in selected)
    return len(selected & relevant) / len(relevant)

def source_contribution(weights, n_sources, n_lags):
    """
    Share of absolute weight carried by each source, summed over its lags.
    `weights` follow the lagged design ordering (source-major, lag-minor).

    Returns:
        np.ndarray (n_sources,) summing to 1
    """
    weights = np.asarray(weights, dtype=np.float64).ravel()
    if weights.size != n_sources * n_lags:
        raise DimensionMismatch(f"Expected {n_sources * n_lags} weights, got "
                                f"{weights.size}.")
    per_source = np.abs(weights).reshape(n_sources, n_lags).sum(axis=1)
    total = per_source.sum()
    if total == 0:
        raise AllZeroWeights("Contribution is undefined when every weight is zero.")
    return per_source / total

def top_k_sources(contribution, k):
    """
    Indices of the k largest contributions, ties going to the lower index.
    """
    contribution = np.asarray(contribution, dtype=np.float64).ravel()
    if k > contribution.size:
        raise KTooLarge(f"k={k} exceeds the {contribution.size} sources.")
    order = np.argsort(-contribution, kind="stable")
    return sorted(int(i) for i in order[:k])

def lag_usage(active_masks, n_sources, n_lags):
    """
    Percentage of models (0-100) in which each lag is used by at least one
    source.

    Args:
        active_masks (array-like): (n_models, n_sources * n_lags) booleans
    Returns:
        np.ndarray (n_lags,)
    """
    masks = np.atleast_2d(np.asarray(active_masks, dtype=bool))
    if masks.shape[1] != n_sources * n_lags:
        raise DimensionMismatch(f"Expected masks with {n_sources * n_lags} "
                                f"columns, got {masks.shape[1]}.")
    used = masks.reshape(masks.shape[0], n_sources, n_lags).any(axis=1)
    return 100.0 * used.mean(axis=0)

def evaluate_regression(pred, truth, active_mask, relevant=None):
    """
    Bundles correlation, rmse, selected-feature count and (optionally) recall
    into a MetricsRecord.
    """
    try:
        corr = correlation(pred, truth)
    except UndefinedCorrelation:
        corr = None
    active_mask = np.asarray(active_mask, dtype=bool)
    recall = None
    if relevant is not None and len(relevant) > 0:
        recall = selection_recall(np.flatnonzero(active_mask), relevant)
    return MetricsRecord(correlation=corr, rmse=rmse(pred, truth),
                         n_selected=int(active_mask.sum()), recall=recall)
