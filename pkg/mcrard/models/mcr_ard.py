"""
Maximum correntropy regression with ARD (MCR-ARD).

The correntropy h sum_n exp(-eps_n^2 / 2h) plays the role of the
log-likelihood. The posterior over (w, a) is approximated by alternating a
Laplace-approximated w-step and a closed-form a-step, pruning every feature
whose relevance crosses a_max.
"""
from dataclasses import dataclass
import logging

import numpy as np

from mcrard.exceptions import NonPositiveBandwidth, NotSPD
from mcrard.linalg import cholesky_lower, cholesky_solve, \
                          inverse_diagonal_from_factor, spd_inverse_diagonal
from .base import FittedModel, a_step, prune, ridge_init, check_protected

logger = logging.getLogger(__name__)

HESSIAN_MODES = ("exact_with_safeguard", "gauss_style_psd")

@dataclass
class McrArdConfig:
    """
    Attributes:
        bandwidth (float): kernel bandwidth h, fixed during the fit
        prune_threshold (float): a_max
        max_outer_iters (int): cap on w-step/a-step alternations
        max_fp_iters (int): cap on fixed-point passes inside one w-step
        fp_tol (float): inner stop, ||dw||_inf < fp_tol
        w_tol (float): outer stop on the full (zero-padded) weight vector
        hessian_mode (str): "exact_with_safeguard" or "gauss_style_psd"
    """
    bandwidth: float = 1.0
    prune_threshold: float = 1e6
    max_outer_iters: int = 500
    max_fp_iters: int = 50
    fp_tol: float = 1e-6
    w_tol: float = 1e-6
    hessian_mode: str = "exact_with_safeguard"

    def __post_init__(self):
        check_bandwidth(self.bandwidth)
        if not self.prune_threshold > 0:
            raise ValueError(f"prune_threshold must be > 0, got {self.prune_threshold}")
        if self.max_outer_iters < 1 or self.max_fp_iters < 1:
            raise ValueError("iteration caps must be >= 1")
        if not (self.fp_tol > 0 and self.w_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.hessian_mode not in HESSIAN_MODES:
            raise ValueError(f"hessian_mode must be one of {HESSIAN_MODES}")

    def with_bandwidth(self, h):
        kwargs = dict(self.__dict__)
        kwargs["bandwidth"] = float(h)
        return McrArdConfig(**kwargs)

def check_bandwidth(h):
    if not h > 0:
        raise NonPositiveBandwidth(f"Bandwidth must be > 0, got {h}.")

def correntropy_log_density(eps, h):
    """
    log C(eps | 0, h) = exp(-eps^2 / 2h); in (0, 1], decreasing in |eps|.
    """
    check_bandwidth(h)
    return np.exp(-np.square(eps) / (2.0 * h))

def correntropy_density(eps, h):
    """
    C(eps | 0, h) = exp(exp(-eps^2 / 2h)). Improper: e at the origin and
    tending to 1 (not 0) in the tails.
    """
    return np.exp(correntropy_log_density(eps, h))

def psi_weights(eps, h):
    """
    Diagonal of Psi, psi_n = exp(-eps_n^2 / 2h), each in (0, 1].
    """
    return correntropy_log_density(np.asarray(eps, dtype=np.float64), h)

def correntropy_objective(X, t, w, a_mean, h):
    """
    J(w) = h sum_n exp(-eps_n^2 / 2h) - w^T diag(a) w / 2, i.e. log q_w(w) up
    to a constant. Near eps = 0 the data term is hN - ||eps||^2 / 2, so large
    h approaches the Gaussian log-likelihood with unit noise variance.
    Logged as a surrogate of the free energy.
    """
    eps = t - X @ w
    return float(h * np.sum(psi_weights(eps, h)) - 0.5 * np.sum(a_mean * w ** 2))

def correntropy_gradient(X, t, w, a_mean, h):
    """
    dJ/dw = X^T Psi eps - diag(a) w
    """
    eps = t - X @ w
    return X.T @ (psi_weights(eps, h) * eps) - a_mean * w

def weighted_gram(X, weights, a_mean):
    """
    X^T diag(weights) X + diag(a_mean), diagonal added in place.
    """
    G = (X * weights[:, None]).T @ X
    G[np.diag_indices_from(G)] += a_mean
    return G

def _factor_with_jitter(M):
    """
    Cholesky of M, retrying once with 1e-10 * trace(M) / D on the diagonal.
    """
    try:
        return cholesky_lower(M, check=False)
    except NotSPD:
        jitter = 1e-10 * np.trace(M) / M.shape[0]
        logger.debug(f"w-step system not SPD, retrying with jitter {jitter:.3e}")
        M = M.copy()
        M[np.diag_indices_from(M)] += jitter
        return cholesky_lower(M, check=False)

def _w_step(X, t, a_mean, h, w_init, max_fp_iters, fp_tol):
    w = np.asarray(w_init, dtype=np.float64).copy()
    for n_fp in range(1, max_fp_iters + 1):
        psi = psi_weights(t - X @ w, h)
        # stationarity of J: (X^T Psi X + A) w = X^T Psi t
        L = _factor_with_jitter(weighted_gram(X, psi, a_mean))
        w_new = cholesky_solve(L, X.T @ (psi * t))
        delta = np.max(np.abs(w_new - w))
        w = w_new
        if delta < fp_tol:
            break
    return (w, n_fp)

def w_step(data, a_mean, h, w_init, cfg=None):
    """
    Maximizes J(w) for fixed relevance with the half-quadratic fixed point
    w <- (X^T Psi X + diag(a))^{-1} X^T Psi t, recomputing Psi from the
    current residuals on every pass.

    Args:
        data (Dataset): active columns only
        a_mean (np.ndarray): (D,) relevance values, >= 0
        h (float): bandwidth
        w_init (np.ndarray): (D,) starting point
        cfg (McrArdConfig): supplies max_fp_iters and fp_tol
    Returns:
        w* (np.ndarray): (D,)
    """
    check_bandwidth(h)
    cfg = McrArdConfig(bandwidth=h) if cfg is None else cfg
    w, _ = _w_step(data.X, data.t, np.asarray(a_mean, dtype=np.float64), h,
                   w_init, cfg.max_fp_iters, cfg.fp_tol)
    return w

def negative_hessian(data, w, a_mean, h, mode="exact_with_safeguard",
                     safeguard=True):
    """
    Negative Hessian of log q_w at w:
        H = sum_n psi_n (1 - eps_n^2 / h) x_n^T x_n + diag(a)

    In exact mode, when H is not SPD, samples with eps_n^2 > h lose their
    (negative) data term, i.e. the bracket is clamped at 0. `safeguard=False`
    returns the raw matrix. "gauss_style_psd" returns X^T Psi X + diag(a).
    """
    check_bandwidth(h)
    H, _ = _hessian_and_factor(data.X, data.t, w,
                               np.asarray(a_mean, dtype=np.float64), h, mode,
                               factor=safeguard)
    return H

def _hessian_and_factor(X, t, w, a_mean, h, mode, factor=True):
    if mode not in HESSIAN_MODES:
        raise ValueError(f"mode must be one of {HESSIAN_MODES}, got {mode!r}")
    eps = t - X @ w
    psi = psi_weights(eps, h)
    if mode == "gauss_style_psd":
        H = weighted_gram(X, psi, a_mean)
        return (H, cholesky_lower(H, check=False) if factor else None)
    bracket = 1.0 - eps ** 2 / h
    H = weighted_gram(X, psi * bracket, a_mean)
    if not factor:
        return (H, None)
    try:
        return (H, cholesky_lower(H, check=False))
    except NotSPD:
        n_dropped = int(np.sum(bracket < 0))
        logger.debug(f"exact Hessian not SPD, dropping {n_dropped} large-error samples")
        H = weighted_gram(X, psi * np.maximum(bracket, 0.0), a_mean)
        return (H, cholesky_lower(H, check=False))

def laplace_moments(H):
    """
    Laplace variances s2_d = (H^{-1})_dd.
    """
    return spd_inverse_diagonal(H)

def mcr_ard_iteration(X, t, w, a_mean, h, cfg):
    """
    One outer iteration on the active columns: w-step, negative Hessian,
    Laplace variances and a-step.

    Returns:
        (w*, updated a, s2, fixed-point passes)
    """
    w_star, n_fp = _w_step(X, t, a_mean, h, w, cfg.max_fp_iters, cfg.fp_tol)
    _, L = _hessian_and_factor(X, t, w_star, a_mean, h, cfg.hessian_mode)
    s2 = inverse_diagonal_from_factor(L)
    return (w_star, a_step(w_star, s2, a_mean), s2, n_fp)

def fit_mcr_ard(data, cfg=None, protected=None):
    """
    Fits MCR-ARD on a (standardized) Dataset.

    Each outer iteration: w-step, negative Hessian, Laplace variances,
    a-step, then pruning of every feature with a_d >= a_max.

    Args:
        data (Dataset): N >= 2
        cfg (McrArdConfig): bandwidth and stopping rules
        protected (array-like): feature indices that are never pruned
    Returns:
        FittedModel
    """
    cfg = McrArdConfig() if cfg is None else cfg
    h = cfg.bandwidth
    check_bandwidth(h)
    X, t = data.X, data.t
    n_samples, n_features = X.shape
    if n_samples < 2:
        raise ValueError(f"MCR-ARD needs at least 2 samples, got {n_samples}")
    protected = check_protected(protected, n_features)

    a = np.ones(n_features)
    active = np.ones(n_features, dtype=bool)
    w = ridge_init(X, t)
    trace = []
    converged = False
    n_iters = 0
    for n_iters in range(1, cfg.max_outer_iters + 1):
        idx = np.flatnonzero(active)
        X_active = X[:, idx]
        a_active = a[idx]
        w_star, a_new, _, n_fp = mcr_ard_iteration(X_active, t, w[idx],
                                                    a_active, h, cfg)
        a[idx] = a_new
        trace.append(correntropy_objective(X_active, t, w_star, a_active, h))

        w_new = np.zeros(n_features)
        w_new[idx] = w_star
        active, newly = prune(active, a, cfg.prune_threshold, protected)
        w_new[newly] = 0.0
        delta = np.max(np.abs(w_new - w))
        w = w_new
        logger.debug(f"mcr-ard iter {n_iters}: active={int(active.sum())}, "
                     f"fp passes={n_fp}, J={trace[-1]:.6g}, dw={delta:.3e}")
        if delta < cfg.w_tol:
            converged = True
            break

    logger.debug(f"mcr-ard (h={h:g}) finished after {n_iters} iterations "
                 f"({int(active.sum())}/{n_features} features kept)")
    return FittedModel(algorithm="mcr-ard", weights=w, active_mask=active,
                       relevance=a, bandwidth=h, n_iters=n_iters,
                       converged=converged, objective_trace=trace,
                       feature_names=data.feature_names)
