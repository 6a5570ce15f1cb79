"""
Kernel bandwidth selection for MCR-ARD: k-fold cross-validation (or a single
seeded holdout split) over a logarithmic grid.
"""
from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd
from sklearn.model_selection import KFold, train_test_split

from mcrard.exceptions import BadGrid, McrArdError, UndefinedCorrelation, \
                              EmptyDataset
from mcrard.metrics import correlation, rmse
from mcrard.models import McrArdConfig, fit_mcr_ard, predict
from mcrard.utils import FLOAT_FORMAT
from .utils import run_tasks

logger = logging.getLogger(__name__)

SELECTION_METRICS = ("correlation", "rmse")
CV_TABLE_COLUMNS = ["h", "mean_corr", "sd_corr", "mean_rmse", "sd_rmse"]
TIE_TOL = 1e-12

@dataclass
class BandwidthGrid:
    lo: float = 1.0
    hi: float = 1000.0
    n_points: int = 30

@dataclass
class CvLayout:
    """
    Attributes:
        n_folds (int): k of k-fold CV, 2 <= k <= N
        seed (int): shuffle seed of the fold partition
        selection_metric (str): "correlation" (maximized) or "rmse" (minimized)
    """
    n_folds: int = 5
    seed: int = 0
    selection_metric: str = "correlation"

    def __post_init__(self):
        if self.n_folds < 2:
            raise ValueError(f"n_folds must be >= 2, got {self.n_folds}.")
        if self.selection_metric not in SELECTION_METRICS:
            raise ValueError(f"selection_metric must be one of {SELECTION_METRICS}.")

def grid_points(grid):
    """
    lo * (hi / lo)^(i / (n_points - 1)), i = 0..n_points-1: equally spaced on a
    log scale, first point lo and last point hi exactly. A one-point grid
    with lo == hi gives [lo].
    """
    lo, hi, n_points = float(grid.lo), float(grid.hi), int(grid.n_points)
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo <= 0:
        raise BadGrid(f"Grid bounds must be finite and > 0, got lo={lo}, hi={hi}.")
    if n_points == 1:
        if lo != hi:
            raise BadGrid(f"A one-point grid needs lo == hi, got {lo} and {hi}.")
        return np.array([lo])
    if n_points < 2 or not lo < hi:
        raise BadGrid(f"Need lo < hi and n_points >= 2, got lo={lo}, hi={hi}, "
                      f"n_points={n_points}.")
    points = lo * (hi / lo) ** (np.arange(n_points) / (n_points - 1))
    points[0], points[-1] = lo, hi
    return points

def score_split(data, train_idx, valid_idx, h, cfg):
    """
    Fits MCR-ARD with bandwidth h on `train_idx` and scores `valid_idx`.
    A failed fit (or a constant prediction) scores -inf correlation and
    +inf RMSE.

    Returns:
        (correlation, rmse)
    """
    cfg = McrArdConfig() if cfg is None else cfg
    try:
        model = fit_mcr_ard(data.subset(train_idx), cfg.with_bandwidth(h))
    except McrArdError as exc:
        logger.debug(f"h={h:g}: fold fit failed ({type(exc).__name__})")
        return (-np.inf, np.inf)
    valid = data.subset(valid_idx)
    pred = predict(model, valid.X)
    try:
        corr = correlation(pred, valid.t)
    except UndefinedCorrelation:
        corr = -np.inf
    return (corr, rmse(pred, valid.t))

def _fold_sd(scores):
    if scores.shape[1] < 2:
        return np.full(scores.shape[0], np.nan)
    with np.errstate(invalid="ignore"):
        return np.std(scores, axis=1, ddof=1)

def _summarize(h_values, fold_corr, fold_rmse):
    with np.errstate(invalid="ignore"):
        return pd.DataFrame({"h": h_values,
                             "mean_corr": fold_corr.mean(axis=1),
                             "sd_corr": _fold_sd(fold_corr),
                             "mean_rmse": fold_rmse.mean(axis=1),
                             "sd_rmse": _fold_sd(fold_rmse)},
                            columns=CV_TABLE_COLUMNS)

def pick_bandwidth(cv_table, selection_metric="correlation"):
    """
    Best h of a cv_table: highest mean correlation (or lowest mean RMSE);
    among values within 1e-12 of the best, the largest h.
    """
    if selection_metric == "correlation":
        score = cv_table["mean_corr"].to_numpy()
    else:
        score = -cv_table["mean_rmse"].to_numpy()
    best = np.max(score)
    if np.isfinite(best):
        tied = np.abs(score - best) <= TIE_TOL
    else:
        logger.warning("Every bandwidth failed on some fold; picking the largest h.")
        tied = score == best
    return float(np.max(cv_table["h"].to_numpy()[tied]))

def _score_task(task):
    return score_split(*task)

def _evaluate_grid(data, splits, grid, cfg, n_jobs, disable):
    h_values = grid_points(grid)
    tasks = [(data, train_idx, valid_idx, h, cfg)
             for h in h_values for (train_idx, valid_idx) in splits]
    scores = run_tasks(_score_task, tasks, n_jobs=n_jobs, desc="bandwidth grid",
                       disable=disable)
    scores = np.asarray(scores, dtype=np.float64).reshape(h_values.size,
                                                          len(splits), 2)
    return _summarize(h_values, scores[..., 0], scores[..., 1])

def select_bandwidth(data, grid=None, cv=None, cfg=None, n_jobs=1, disable=True):
    """
    k-fold cross-validated bandwidth selection on training data only.

    Args:
        data (Dataset): training set, in the space the model is fit in
        grid (BandwidthGrid): candidate bandwidths
        cv (CvLayout): folds, seed and selection metric
        cfg (McrArdConfig): fit settings; its bandwidth is overridden per h
        disable (bool): hides the progress bar
    Returns:
        (h_best, cv_table DataFrame with columns h, mean_corr, sd_corr,
         mean_rmse, sd_rmse)
    """
    grid = BandwidthGrid() if grid is None else grid
    cv = CvLayout() if cv is None else cv
    if data.n_samples < cv.n_folds:
        raise EmptyDataset(f"{cv.n_folds}-fold CV needs at least {cv.n_folds} "
                           f"samples, got {data.n_samples}.")
    kfold = KFold(n_splits=cv.n_folds, shuffle=True, random_state=cv.seed)
    splits = list(kfold.split(data.X))
    logger.info(f"Using {cv.n_folds} folds over {int(grid.n_points)} bandwidths...")
    cv_table = _evaluate_grid(data, splits, grid, cfg, n_jobs, disable)
    h_best = pick_bandwidth(cv_table, cv.selection_metric)
    logger.info(f"Selected h={h_best:g}")
    return (h_best, cv_table)

def select_bandwidth_holdout(data, grid=None, train_fraction=0.875, seed=0,
                             cfg=None, selection_metric="correlation",
                             n_jobs=1, disable=True):
    """
    Same grid and tie rule as `select_bandwidth`, scored on one seeded
    train/validation split (e.g. 35 of 40 trials for training). The sd
    columns of the returned table are NaN.
    """
    grid = BandwidthGrid() if grid is None else grid
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}.")
    if selection_metric not in SELECTION_METRICS:
        raise ValueError(f"selection_metric must be one of {SELECTION_METRICS}.")
    train_idx, valid_idx = train_test_split(np.arange(data.n_samples),
                                            train_size=train_fraction,
                                            random_state=seed, shuffle=True)
    logger.info(f"Holdout split: {train_idx.size} train / {valid_idx.size} validation")
    cv_table = _evaluate_grid(data, [(np.sort(train_idx), np.sort(valid_idx))],
                              grid, cfg, n_jobs, disable)
    h_best = pick_bandwidth(cv_table, selection_metric)
    logger.info(f"Selected h={h_best:g}")
    return (h_best, cv_table)

def save_cv_table(cv_table, csv_path):
    cv_table.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Saving {csv_path}...")
    return csv_path
