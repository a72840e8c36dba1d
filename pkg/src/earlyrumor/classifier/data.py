"""Design matrices of event vectors and their validation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DatasetError(ValueError):
    """Rows, labels and ids do not line up, or values are non-finite."""


def check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DatasetError("design matrix must be 2-D")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise DatasetError("labels must be a vector with one entry per row")
    if not np.all(np.isfinite(X)):
        r, c = np.argwhere(~np.isfinite(X))[0]
        raise DatasetError(f"non-finite value at row {r}, column {c}")
    if not np.all(np.isin(y, (0, 1))):
        raise DatasetError("labels must be 0 (news) or 1 (rumor)")
    return X, y.astype(np.int64)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    event_ids: list[str] = field(default_factory=list)
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X, self.y = check_xy(self.X, self.y)
        if self.event_ids and len(self.event_ids) != self.X.shape[0]:
            raise DatasetError("one event id per row is required")
        if self.feature_names and len(self.feature_names) != self.X.shape[1]:
            raise DatasetError("one feature name per column is required")

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, rows=None, cols=None) -> "Dataset":
        rows = np.arange(len(self)) if rows is None else np.asarray(rows)
        cols = np.arange(self.X.shape[1]) if cols is None else np.asarray(cols)
        ids = [self.event_ids[i] for i in rows] if self.event_ids else []
        names = [self.feature_names[j] for j in cols] if self.feature_names else []
        return Dataset(self.X[np.ix_(rows, cols)], self.y[rows], ids, names)
