"""Random forest of Gini CART trees with a deduplicating bootstrap.

Trees are grown by scikit-learn's ``DecisionTreeClassifier``; the bootstrap,
voting, out-of-bag bookkeeping and prediction are done here. Each fitted tree
is flattened into plain arrays so the whole forest can be evaluated by a
compiled loop and stored exactly.
"""
from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field

import numba
import numpy as np
import sklearn
from sklearn.tree import DecisionTreeClassifier

from .data import check_xy

LEAF = -1


class SingleClassError(ValueError):
    """Training labels hold only one class."""


@dataclass
class FlatTree:
    feature: np.ndarray      # int64, LEAF at leaves
    threshold: np.ndarray    # float64, go left when x <= threshold
    left: np.ndarray         # int64
    right: np.ndarray        # int64
    leaf_class: np.ndarray   # int64 majority class at each node
    seed: int = 0


@dataclass
class ForestModel:
    trees: list[FlatTree]
    n_features: int
    seed: int
    oob_accuracy: float = float("nan")
    feature_names: list[str] = field(default_factory=list)
    _pack: tuple | None = field(default=None, repr=False, compare=False)

    def _packed(self):
        if self._pack is not None:
            return self._pack
        sizes = np.array([t.feature.size for t in self.trees], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        cols = [np.concatenate([getattr(t, key) for t in self.trees])
                for key in ("feature", "threshold", "left", "right", "leaf_class")]
        self._pack = (offsets, *cols)
        return self._pack

    def votes(self, X: np.ndarray) -> np.ndarray:
        """Per-row count of trees voting for class 1."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} columns")
        return _forest_votes(X, *self._packed())

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting rumor (class 1)."""
        return self.votes(X) / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        # a tied vote goes to class 1
        return (2 * self.votes(X) >= len(self.trees)).astype(np.int64)


@numba.njit(cache=True)
def _tree_leaf_class(x, base, feature, threshold, left, right, leaf_class):
    node = 0
    while feature[base + node] != LEAF:
        if x[feature[base + node]] <= threshold[base + node]:
            node = left[base + node]
        else:
            node = right[base + node]
    return leaf_class[base + node]


@numba.njit(cache=True)
def _forest_votes(X, offsets, feature, threshold, left, right, leaf_class):
    out = np.zeros(X.shape[0], dtype=np.int64)
    for r in range(X.shape[0]):
        for t in range(offsets.size):
            out[r] += _tree_leaf_class(X[r], offsets[t], feature, threshold, left, right, leaf_class)
    return out


@numba.njit(cache=True)
def _oob_votes(X, out_of_bag, offsets, feature, threshold, left, right, leaf_class):
    """Per row: (votes for class 1, number of trees) over the trees that did not see it."""
    votes = np.zeros(X.shape[0], dtype=np.int64)
    n = np.zeros(X.shape[0], dtype=np.int64)
    for t in range(offsets.size):
        for r in range(X.shape[0]):
            if out_of_bag[t, r]:
                votes[r] += _tree_leaf_class(X[r], offsets[t], feature, threshold, left, right,
                                             leaf_class)
                n[r] += 1
    return votes, n


def _flatten(tree: DecisionTreeClassifier, seed: int) -> FlatTree:
    t = tree.tree_
    feature = t.feature.astype(np.int64)
    feature[t.children_left == -1] = LEAF
    counts = t.value[:, 0, :]
    # value holds class weights in the order of tree.classes_, which is [0, 1]
    leaf_class = (counts[:, 1] > counts[:, 0]).astype(np.int64)
    return FlatTree(feature, t.threshold.astype(np.float64), t.children_left.astype(np.int64),
                    t.children_right.astype(np.int64), leaf_class, seed)


def _unique_rows(X: np.ndarray, y: np.ndarray):
    """Distinct (x, y) rows in a canonical (sorted) order and their multiplicities."""
    xy = np.column_stack([X, y.astype(np.float64)])
    uniq, counts = np.unique(xy, axis=0, return_counts=True)
    return uniq[:, :-1], uniq[:, -1].astype(np.int64), counts


def fit_tree(X: np.ndarray, y: np.ndarray, weight: np.ndarray, seed: int) -> FlatTree:
    """One unpruned Gini CART with sqrt(P) candidate features per split.

    The tree learner works in float32 internally; converting up front lets it
    skip its own input validation without changing any split.
    """
    tree = DecisionTreeClassifier(criterion="gini", max_features="sqrt", min_samples_leaf=1,
                                  random_state=seed)
    X32 = X if X.dtype == np.float32 and X.flags.c_contiguous else np.ascontiguousarray(X, np.float32)
    tree.fit(X32, np.asarray(y), sample_weight=np.asarray(weight, dtype=np.float64),
             check_input=False)
    if list(tree.classes_) != [0, 1]:
        # a bootstrap sample with a single class still yields a valid constant tree
        cls = int(tree.classes_[0])
        return FlatTree(np.array([LEAF]), np.array([0.0]), np.array([-1]), np.array([-1]),
                        np.array([cls]), seed)
    return _flatten(tree, seed)


def bootstrap_weights(counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw as many rows as there are distinct rows, with probability proportional to
    multiplicity; returns how often each distinct row was drawn."""
    n = counts.size
    draws = rng.choice(n, size=n, replace=True, p=counts / counts.sum())
    return np.bincount(draws, minlength=n).astype(np.float64)


def train_random_forest(X, y, n_trees: int = 350, seed: int = 0,
                        feature_names: list[str] | None = None) -> ForestModel:
    """Grow ``n_trees`` trees on bootstrap samples; records out-of-bag accuracy.

    Identical rows are collapsed before sampling, so duplicating the whole
    training set leaves every tree (and every prediction) unchanged.
    """
    X, y = check_xy(X, y)
    if np.unique(y).size < 2:
        raise SingleClassError("random forest needs both classes")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    ux, uy, counts = _unique_rows(X, y)
    ux32 = np.ascontiguousarray(ux, dtype=np.float32)
    seeds = np.random.default_rng(seed).integers(0, 2**31 - 1, size=n_trees)
    trees = []
    out_of_bag = np.zeros((n_trees, ux.shape[0]), dtype=np.bool_)
    # inputs are validated above; skipping the per-call checks leaves every split unchanged
    with sklearn.config_context(skip_parameter_validation=True, assume_finite=True):
        for k, s in enumerate(seeds):
            rng = np.random.default_rng(int(s))
            w = bootstrap_weights(counts, rng)
            in_bag = w > 0
            trees.append(fit_tree(ux32[in_bag], uy[in_bag], w[in_bag], int(s)))
            out_of_bag[k] = ~in_bag
    forest = ForestModel(trees, X.shape[1], seed, float("nan"), list(feature_names or []))
    oob_votes, oob_n = _oob_votes(np.ascontiguousarray(ux), out_of_bag, *forest._packed())
    seen = oob_n > 0
    oob = float("nan")
    if seen.any():
        pred = (2 * oob_votes[seen] >= oob_n[seen]).astype(np.int64)
        # weight distinct rows by multiplicity so the figure refers to the original rows
        oob = float(np.sum((pred == uy[seen]) * counts[seen]) / np.sum(counts[seen]))
    forest.oob_accuracy = oob
    return forest


def _b64(arr: np.ndarray, dtype: str) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype=dtype).tobytes()).decode("ascii")


def _unb64(text: str, dtype: str) -> np.ndarray:
    native = np.int64 if dtype == "<i8" else np.float64
    return np.frombuffer(base64.b64decode(text), dtype=dtype).astype(native)


def forest_to_json(model: ForestModel) -> str:
    doc = {
        "format": "earlyrumor-forest", "version": 1, "seed": model.seed,
        "n_features": model.n_features, "oob_accuracy": float(model.oob_accuracy).hex(),
        "feature_names": model.feature_names,
        "trees": [{"seed": t.seed, "feature": _b64(t.feature, "<i8"),
                   "threshold": _b64(t.threshold, "<f8"), "left": _b64(t.left, "<i8"),
                   "right": _b64(t.right, "<i8"), "leaf_class": _b64(t.leaf_class, "<i8")}
                  for t in model.trees],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def forest_from_json(text: str) -> ForestModel:
    doc = json.loads(text)
    if doc.get("format") != "earlyrumor-forest":
        raise ValueError("not a forest model file")
    trees = [FlatTree(_unb64(t["feature"], "<i8"), _unb64(t["threshold"], "<f8"),
                      _unb64(t["left"], "<i8"), _unb64(t["right"], "<i8"),
                      _unb64(t["leaf_class"], "<i8"), int(t["seed"]))
             for t in doc["trees"]]
    return ForestModel(trees, int(doc["n_features"]), int(doc["seed"]),
                       float.fromhex(doc["oob_accuracy"]), list(doc["feature_names"]))
