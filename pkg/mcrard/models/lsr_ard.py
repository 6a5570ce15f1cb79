"""
Sparse Bayesian linear regression with a Gaussian likelihood and an ARD
prior (the LSR-ARD baseline).

The update loop mirrors MCR-ARD step for step (posterior of w, relevance
update, pruning) so that the two estimators differ only in the likelihood.
"""
from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np

from mcrard.linalg import cholesky_lower, cholesky_solve, \
                          inverse_diagonal_from_factor, \
                          quadratic_diagonal_from_factor
from mcrard.metrics import top_k_sources
from .base import FittedModel, a_step, prune, ridge_init, check_protected

logger = logging.getLogger(__name__)

@dataclass
class LsrArdConfig:
    """
    Attributes:
        prune_threshold (float): a_max; a feature is removed once a_d >= a_max
        max_iters (int): outer iteration cap
        w_tol (float): stop once ||w_new - w_old||_inf < w_tol
        sigma2_floor (float): lower bound on the noise variance
        noise_variance (float): if set, sigma^2 is pinned to this value
            instead of being re-estimated
    """
    prune_threshold: float = 1e6
    max_iters: int = 500
    w_tol: float = 1e-6
    sigma2_floor: float = 1e-12
    noise_variance: Optional[float] = None

    def __post_init__(self):
        if not self.prune_threshold > 0:
            raise ValueError(f"prune_threshold must be > 0, got {self.prune_threshold}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (self.w_tol > 0 and self.sigma2_floor > 0):
            raise ValueError("tolerances must be > 0")
        if self.noise_variance is not None and not self.noise_variance > 0:
            raise ValueError(f"noise_variance must be > 0, got {self.noise_variance}")

def gaussian_posterior(X, t, a, sigma2):
    """
    Mean and marginal variances of N(w | mean, Sigma) with
    Sigma = (X^T X / sigma^2 + diag(a))^{-1}.

    The D x D system is used when D <= N; otherwise the Woodbury form on the
    N x N matrix sigma^2 I + X diag(a)^{-1} X^T.

    Returns:
        (mean (D,), diag(Sigma) (D,))
    """
    n_samples, n_features = X.shape
    if n_features <= n_samples:
        L = cholesky_lower(X.T @ X + sigma2 * np.diag(a))
        mean = cholesky_solve(L, X.T @ t)
        sigma_diag = sigma2 * inverse_diagonal_from_factor(L)
    else:
        a_inv = 1.0 / a
        X_scaled = X * a_inv
        L = cholesky_lower(sigma2 * np.eye(n_samples) + X_scaled @ X.T)
        mean = X_scaled.T @ cholesky_solve(L, t)
        sigma_diag = a_inv - a_inv ** 2 * quadratic_diagonal_from_factor(L, X)
    # cancellation in the Woodbury form can leave tiny negative variances
    sigma_diag = np.maximum(sigma_diag, np.finfo(np.float64).tiny)
    return (mean, sigma_diag)

def update_noise_variance(X, t, mean, gamma, floor):
    """
    sigma^2 <- ||t - X w||^2 / (N - sum(gamma)), floored.
    """
    resid = t - X @ mean
    # keep at least one residual degree of freedom
    dof = max(X.shape[0] - float(np.sum(gamma)), 1.0)
    return max(float(resid @ resid) / dof, floor)

def gaussian_objective(X, t, w, a, sigma2):
    """
    Penalized Gaussian log-likelihood -||t - Xw||^2 / 2 sigma^2 - w^T A w / 2,
    logged for diagnostics.
    """
    resid = t - X @ w
    return float(-0.5 * resid @ resid / sigma2 - 0.5 * np.sum(a * w ** 2))

def fit_lsr_ard(data, cfg=None, protected=None):
    """
    Fits LSR-ARD on a (standardized) Dataset.

    Args:
        data (Dataset): N >= 2
        cfg (LsrArdConfig): defaults to LsrArdConfig()
        protected (array-like): feature indices that are never pruned
            (e.g. an intercept column)
    Returns:
        FittedModel
    """
    cfg = LsrArdConfig() if cfg is None else cfg
    X, t = data.X, data.t
    n_samples, n_features = X.shape
    if n_samples < 2:
        raise ValueError(f"LSR-ARD needs at least 2 samples, got {n_samples}")
    protected = check_protected(protected, n_features)

    pinned = cfg.noise_variance is not None
    if pinned:
        sigma2 = float(cfg.noise_variance)
    else:
        sigma2 = max(0.1 * float(np.var(t)), cfg.sigma2_floor)
    a = np.ones(n_features)
    active = np.ones(n_features, dtype=bool)
    w = ridge_init(X, t)
    trace = []
    converged = False
    n_iters = 0
    for n_iters in range(1, cfg.max_iters + 1):
        idx = np.flatnonzero(active)
        X_active = X[:, idx]
        mean, sigma_diag = gaussian_posterior(X_active, t, a[idx], sigma2)
        gamma = 1.0 - a[idx] * sigma_diag
        trace.append(gaussian_objective(X_active, t, mean, a[idx], sigma2))
        a[idx] = a_step(mean, sigma_diag, a[idx])
        if not pinned:
            sigma2 = update_noise_variance(X_active, t, mean, gamma,
                                           cfg.sigma2_floor)

        w_new = np.zeros(n_features)
        w_new[idx] = mean
        active, newly = prune(active, a, cfg.prune_threshold, protected)
        w_new[newly] = 0.0
        delta = np.max(np.abs(w_new - w))
        w = w_new
        logger.debug(f"lsr-ard iter {n_iters}: active={int(active.sum())}, "
                     f"sigma2={sigma2:.4g}, dw={delta:.3e}")
        if delta < cfg.w_tol:
            converged = True
            break

    logger.debug(f"lsr-ard finished after {n_iters} iterations "
                 f"({int(active.sum())}/{n_features} features kept)")
    return FittedModel(algorithm="lsr-ard", weights=w, active_mask=active,
                       relevance=a, noise_variance=sigma2, n_iters=n_iters,
                       converged=converged, objective_trace=trace,
                       feature_names=data.feature_names)

def fit_least_squares(X, t):
    """
    Plain (non-robust, non-sparse) least squares via lstsq.
    """
    weights, *_ = np.linalg.lstsq(X, t, rcond=None)
    return weights

def refit_top_sources(data, contribution, n_sources, n_lags, k=10):
    """
    Refits naive least squares on the lagged columns of the k sources with
    the largest contribution, zeroing every other column. Comparing the refit
    across estimators scores their source selection on an equal footing.

    Returns:
        (weights (S * L,), selected source indices)
    """
    selected = top_k_sources(contribution, k)
    columns = np.concatenate([np.arange(s * n_lags, (s + 1) * n_lags)
                              for s in selected])
    weights = np.zeros(data.n_features)
    weights[columns] = fit_least_squares(data.X[:, columns], data.t)
    return (weights, selected)
