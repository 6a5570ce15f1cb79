from dataclasses import dataclass, field
from typing import List, Optional
import logging

import numpy as np
import pandas as pd

from mcrard.exceptions import DimensionMismatch, EmptyDataset, InputFormatError
from mcrard.utils import FLOAT_FORMAT

logger = logging.getLogger(__name__)

@dataclass
class Dataset:
    """
    Covariates plus responses, the unit of training/evaluation.

    Attributes:
        X (np.ndarray): (N, D) covariates
        t (np.ndarray): (N,) responses
        feature_names (list of str): optional column labels, length D
    """
    X: np.ndarray
    t: np.ndarray
    feature_names: Optional[List[str]] = field(default=None)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.t = np.asarray(self.t, dtype=np.float64).ravel()
        if self.X.ndim != 2:
            raise DimensionMismatch(f"X must be 2D, got shape {self.X.shape}.")
        if self.X.shape[0] == 0 or self.X.shape[1] == 0:
            raise EmptyDataset(f"Dataset needs N >= 1 and D >= 1, got {self.X.shape}.")
        if self.X.shape[0] != self.t.shape[0]:
            raise DimensionMismatch(f"X has {self.X.shape[0]} rows but t has "
                                    f"{self.t.shape[0]} entries.")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.t))):
            raise ValueError("Dataset entries must be finite.")
        if self.feature_names is not None:
            self.feature_names = [str(name) for name in self.feature_names]
            if len(self.feature_names) != self.X.shape[1]:
                raise DimensionMismatch(f"{len(self.feature_names)} feature names "
                                        f"for {self.X.shape[1]} columns.")

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def names(self):
        """
        Feature names, generating `x{d}` labels when none were given.
        """
        if self.feature_names is not None:
            return list(self.feature_names)
        return [f"x{d}" for d in range(self.n_features)]

    def subset(self, indices):
        """
        Row subset (e.g. a CV fold) sharing the feature names.
        """
        indices = np.asarray(indices, dtype=int)
        return Dataset(self.X[indices], self.t[indices], self.feature_names)

    def with_target(self, t):
        return Dataset(self.X, t, self.feature_names)

    def with_covariates(self, X):
        return Dataset(X, self.t, self.feature_names)

def _first_bad_cell(raw_df, numeric_df):
    """
    (line, column) of the first cell that isn't a finite number, 1-based with
    the header on line 1.
    """
    bad = ~np.isfinite(numeric_df.to_numpy(dtype=np.float64))
    rows, cols = np.nonzero(bad)
    if rows.size == 0:
        return None
    order = np.lexsort((cols, rows))
    r, c = rows[order[0]], cols[order[0]]
    return (int(r) + 2, int(c) + 1, raw_df.columns[c], raw_df.iat[r, c])

def read_numeric_csv(path):
    """
    Reads a headered csv in which every cell must be numeric.

    Raises:
        InputFormatError: with the line/column of the first malformed cell
    """
    try:
        raw_df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError,
            UnicodeDecodeError) as exc:
        raise InputFormatError(f"could not parse csv ({exc})", path=path) from exc
    raw_df.columns = [str(c).strip() for c in raw_df.columns]
    numeric_df = raw_df.apply(lambda col: pd.to_numeric(col.str.strip(),
                                                        errors="coerce"))
    bad = _first_bad_cell(raw_df, numeric_df)
    if bad is not None:
        line, column, name, value = bad
        raise InputFormatError(f"non-numeric value {value!r} in column {name!r}",
                               path=path, line=line, column=column)
    return numeric_df.astype(np.float64)

def load_dataset_csv(path, target_column="target"):
    """
    Loads a Dataset from a csv with a header of feature names and one target
    column (default `target`).

    Args:
        path (str): path to the csv
        target_column (str): name of the response column
    Returns:
        Dataset
    """
    df = read_numeric_csv(path)
    if target_column not in df.columns:
        raise InputFormatError(f"missing target column {target_column!r} "
                               f"(columns: {list(df.columns)})", path=path, line=1)
    if df.shape[0] == 0:
        raise EmptyDataset(f"{path} has no data rows.")
    feature_cols = [c for c in df.columns if c != target_column]
    if len(feature_cols) == 0:
        raise InputFormatError("no covariate columns besides the target",
                               path=path, line=1)
    logger.info(f"Loaded {path}: {df.shape[0]} samples, {len(feature_cols)} features")
    return Dataset(df[feature_cols].to_numpy(), df[target_column].to_numpy(),
                   feature_cols)

def save_dataset_csv(data, path, target_column="target"):
    """
    Writes `data` in the layout read by `load_dataset_csv`.
    """
    df = pd.DataFrame(data.X, columns=data.names())
    df[target_column] = data.t
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Saving {path}...")
    return path
