from dataclasses import dataclass
import logging

import numpy as np

from mcrard.exceptions import DimensionMismatch, InputFormatError, SeriesTooShort
from .dataset import Dataset, read_numeric_csv

logger = logging.getLogger(__name__)

@dataclass
class LagSpec:
    """
    Attributes:
        n_lags (int): samples per source in the window, current sample
            included (21 samplings at 125 Hz cover 160 ms)
        stride (int): spacing between consecutive lags, in samples
    """
    n_lags: int = 21
    stride: int = 1

    def __post_init__(self):
        if self.n_lags < 1:
            raise ValueError("n_lags must be >= 1.")
        if self.stride < 1:
            raise ValueError("stride must be >= 1.")

def lagged_feature_names(n_sources, spec):
    """
    `src{s}_lag{l}` in (source-major, lag-minor) order. Within a source the
    columns run chronologically, so lag{n_lags-1} (oldest) comes first and
    lag0 (the current sample) last.
    """
    return [f"src{s}_lag{lag}" for s in range(n_sources)
            for lag in reversed(range(spec.n_lags))]

def build_lagged_design(series, target, spec=None):
    """
    Builds the design matrix where row i predicts the target at time
    (n_lags - 1) * stride + i from the n_lags most recent samples of every
    source.

    Args:
        series (np.ndarray): (T, S) source/channel time series
        target (np.ndarray): (T,) response time series
        spec (LagSpec): window definition
    Returns:
        Dataset with N = T - (n_lags - 1) * stride rows and S * n_lags
        columns ordered (source-major, lag-minor)
    """
    spec = LagSpec() if spec is None else spec
    series = np.asarray(series, dtype=np.float64)
    if series.ndim == 1:
        series = series[:, None]
    target = np.asarray(target, dtype=np.float64).ravel()
    n_time, n_sources = series.shape
    if target.shape[0] != n_time:
        raise DimensionMismatch(f"series has {n_time} samples but target has "
                                f"{target.shape[0]}.")
    if n_time <= spec.n_lags * spec.stride:
        raise SeriesTooShort(f"{n_time} samples cannot fill {spec.n_lags} lags "
                             f"with stride {spec.stride}.")
    span = (spec.n_lags - 1) * spec.stride
    times = np.arange(span, n_time)
    # offsets run oldest -> newest
    offsets = np.arange(-span, 1, spec.stride)
    windows = series[times[:, None] + offsets[None, :], :]  # (N, n_lags, S)
    X = windows.transpose(0, 2, 1).reshape(times.shape[0], n_sources * spec.n_lags)
    return Dataset(X, target[times], lagged_feature_names(n_sources, spec))

def load_time_series_csv(series_path, target_path, target_column="target"):
    """
    Reads the lag-mode inputs: a series csv whose first column is
    `time_index` followed by one column per source, and a target csv with a
    `target` column (and optionally `time_index`).

    Returns:
        (series (T, S), target (T,), source names)
    """
    series_df = read_numeric_csv(series_path)
    if series_df.columns[0] != "time_index":
        raise InputFormatError("first column must be 'time_index', got "
                               f"{series_df.columns[0]!r}", path=series_path,
                               line=1, column=1)
    if series_df.shape[1] < 2:
        raise InputFormatError("no source columns after 'time_index'",
                               path=series_path, line=1)
    target_df = read_numeric_csv(target_path)
    if target_column not in target_df.columns:
        raise InputFormatError(f"missing target column {target_column!r}",
                               path=target_path, line=1)
    if target_df.shape[0] != series_df.shape[0]:
        raise InputFormatError(f"target has {target_df.shape[0]} rows but the "
                               f"series has {series_df.shape[0]}", path=target_path)
    if "time_index" in target_df.columns:
        mismatch = np.nonzero(target_df["time_index"].to_numpy()
                              != series_df["time_index"].to_numpy())[0]
        if mismatch.size:
            raise InputFormatError("time_index does not match the series",
                                   path=target_path, line=int(mismatch[0]) + 2,
                                   column=list(target_df.columns).index("time_index") + 1)
    sources = list(series_df.columns[1:])
    logger.info(f"Loaded {series_df.shape[0]} samples of {len(sources)} sources")
    return (series_df[sources].to_numpy(), target_df[target_column].to_numpy(),
            sources)
