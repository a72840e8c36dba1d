"""Stratified 10-fold evaluation, grouped permutation importance and accuracy over time."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from ..dsts import base_feature
from .data import Dataset
from .forest import ForestModel, train_random_forest
from .svm import SvmModel, train_svm_rbf

MODEL_KINDS = ("rf", "svm")
DEFAULT_HOURS = (1, 6, 12, 18, 24, 30, 36, 42, 48)
N_FOLDS = 10


class TooFewEventsError(ValueError):
    """Not enough events per class for the requested number of folds."""


@dataclass
class FittedPipeline:
    """A classifier plus the column scaling learned from its training rows only."""
    kind: str
    model: ForestModel | SvmModel
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.mean is None:
            return np.asarray(X, dtype=np.float64)
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict(self.transform(X))


def fit_pipeline(kind: str, X: np.ndarray, y: np.ndarray, *, seed: int = 0, n_trees: int = 350,
                 C: float = 3.0, gamma: float = 0.2) -> FittedPipeline:
    """Train one model. The SVM path standardises columns with training statistics."""
    if kind == "rf":
        return FittedPipeline(kind, train_random_forest(X, y, n_trees=n_trees, seed=seed))
    if kind == "svm":
        X = np.asarray(X, dtype=np.float64)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        model = train_svm_rbf((X - mean) / scale, y, C=C, gamma=gamma, seed=seed)
        return FittedPipeline(kind, model, mean, scale)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def stratified_folds(y, n_folds: int = N_FOLDS, seed: int = 0) -> np.ndarray:
    """Fold index per row: each class is shuffled and dealt round-robin, the second
    class continuing where the first stopped, so fold sizes differ by at most one."""
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2 or counts.min() < n_folds:
        raise TooFewEventsError(f"need at least {n_folds} events per class, got "
                                f"{dict(zip(classes.tolist(), counts.tolist()))}")
    rng = np.random.default_rng(seed)
    folds = np.empty(y.size, dtype=np.int64)
    start = 0
    for cls in classes:
        idx = rng.permutation(np.flatnonzero(y == cls))
        folds[idx] = (start + np.arange(idx.size)) % n_folds
        start = (start + idx.size) % n_folds
    return folds


@dataclass
class CVResult:
    model_kind: str
    fold_accuracy: np.ndarray
    pooled_accuracy: float
    confusion: np.ndarray            # rows true (news, rumor), columns predicted
    predictions: np.ndarray
    folds: np.ndarray
    pipelines: list[FittedPipeline] = field(default_factory=list, repr=False)

    @property
    def mean(self) -> float:
        return float(self.fold_accuracy.mean())

    @property
    def std(self) -> float:
        return float(self.fold_accuracy.std())


def cross_validate(data: Dataset, model_kind: str = "rf", seed: int = 0, *,
                   n_folds: int = N_FOLDS, keep_models: bool = False,
                   folds: np.ndarray | None = None, **model_kw) -> CVResult:
    """Train on nine folds, test on the tenth, for every fold."""
    folds = stratified_folds(data.y, n_folds, seed) if folds is None else np.asarray(folds)
    pred = np.empty_like(data.y)
    acc = np.zeros(n_folds)
    kept = []
    for k in range(n_folds):
        test = folds == k
        pipe = fit_pipeline(model_kind, data.X[~test], data.y[~test], seed=seed + k, **model_kw)
        pred[test] = pipe.predict(data.X[test])
        acc[k] = np.mean(pred[test] == data.y[test])
        if keep_models:
            kept.append(pipe)
    conf = np.zeros((2, 2), dtype=np.int64)
    np.add.at(conf, (data.y, pred), 1)
    return CVResult(model_kind, acc, float(np.mean(pred == data.y)), conf, pred, folds, kept)


def base_feature_groups(names: Sequence[str]) -> dict[str, np.ndarray]:
    """Column indices per base feature (``X@t3`` and ``dX@t3`` both belong to ``X``)."""
    groups: dict[str, list[int]] = {}
    for j, name in enumerate(names):
        groups.setdefault(base_feature(name), []).append(j)
    return {k: np.array(v) for k, v in groups.items()}


def permutation_importance(model, data: Dataset, n_repeats: int = 5, seed: int = 0,
                           groups: Mapping[str, np.ndarray] | None = None) -> list[tuple[str, float]]:
    """Mean accuracy drop when a feature's columns are shuffled together across rows.

    ``model`` needs a ``predict`` method. Groups default to base features
    derived from ``data.feature_names``. Sorted by importance (descending),
    ties by name.
    """
    if groups is None:
        groups = base_feature_groups(data.feature_names)
    base = float(np.mean(model.predict(data.X) == data.y))
    rng = np.random.default_rng(seed)
    out = []
    for name in sorted(groups):
        cols = np.asarray(groups[name])
        drops = []
        for _ in range(n_repeats):
            Xp = data.X.copy()
            perm = rng.permutation(len(data))
            Xp[:, cols] = data.X[perm][:, cols]
            drops.append(base - float(np.mean(model.predict(Xp) == data.y)))
        out.append((name, float(np.mean(drops))))
    return rank_importance(out)


def rank_importance(pairs) -> list[tuple[str, float]]:
    return sorted(pairs, key=lambda kv: (-kv[1], kv[0]))


def cv_permutation_importance(data: Dataset, model_kind: str = "rf", seed: int = 0, *,
                              n_repeats: int = 5, n_folds: int = N_FOLDS,
                              groups: Mapping[str, np.ndarray] | None = None,
                              **model_kw) -> list[tuple[str, float]]:
    """Permutation importance on each held-out fold, averaged over folds."""
    cv = cross_validate(data, model_kind, seed, n_folds=n_folds, keep_models=True, **model_kw)
    totals: dict[str, float] = {}
    for k, pipe in enumerate(cv.pipelines):
        test = data.subset(np.flatnonzero(cv.folds == k))
        for name, imp in permutation_importance(pipe, test, n_repeats, seed + k, groups):
            totals[name] = totals.get(name, 0.0) + imp / n_folds
    return rank_importance(totals.items())


def best_set(importance_by_hour: Mapping[int, Sequence[tuple[str, float]]], k: int = 9) -> list[str]:
    """Top-``k`` features by mean importance over all hours (ties by name)."""
    totals: dict[str, list[float]] = {}
    for ranking in importance_by_hour.values():
        for name, imp in ranking:
            totals.setdefault(name, []).append(imp)
    mean = [(name, float(np.mean(v))) for name, v in totals.items()]
    return [name for name, _ in rank_importance(mean)[:k]]


@dataclass
class ReportRow:
    model: str
    feature_group: str
    hour: int
    fold: str
    accuracy: float


def accuracy_over_time(dataset_for: Callable[[int, str, Sequence[str] | None], Dataset],
                       model_kinds: Sequence[str] = ("rf",), hours: Sequence[int] = DEFAULT_HOURS,
                       seed: int = 0, groups: Mapping[str, Sequence[str] | None] | None = None,
                       n_folds: int = N_FOLDS, **model_kw) -> list[ReportRow]:
    """Cross-validated accuracy per model kind, feature group and prefix hour.

    ``dataset_for(hour, kind, features)`` builds the prefix dataset; a group
    mapped to ``None`` uses every feature. Each cell yields one row per fold
    plus ``mean``, ``std`` and ``pooled`` rows.
    """
    groups = groups or {"All": None}
    rows = []
    for kind in model_kinds:
        for gname, feats in groups.items():
            for h in hours:
                cv = cross_validate(dataset_for(h, kind, feats), kind, seed, n_folds=n_folds,
                                    **model_kw)
                rows += [ReportRow(kind, gname, h, str(k), float(a))
                         for k, a in enumerate(cv.fold_accuracy)]
                rows += [ReportRow(kind, gname, h, "mean", cv.mean),
                         ReportRow(kind, gname, h, "std", cv.std),
                         ReportRow(kind, gname, h, "pooled", cv.pooled_accuracy)]
    return rows
