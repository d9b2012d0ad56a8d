"""Random forest of entropy-gain decision trees over sparse count features."""

from __future__ import annotations

import json
import math
import numbers
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import _tree_kernel as K
from ._validation import check_count_matrix, check_labels

FORMAT_NAME = "emobow-forest"
FORMAT_VERSION = 1


class EmptyNode(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def entropy(class_counts: Mapping | Sequence[float]) -> float:
    """Shannon entropy in bits of a class-count distribution (``0 log 0 = 0``)."""
    counts = list(class_counts.values()) if isinstance(class_counts, Mapping) else list(class_counts)
    if any(c < 0 for c in counts):
        raise ValueError("class counts must be non-negative")
    total = float(sum(counts))
    if total <= 0:
        raise EmptyNode("entropy of an empty node")
    return max(0.0, -sum((c / total) * math.log2(c / total) for c in counts if c > 0))


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float


def best_split(X, y, candidate_features=None, *, min_samples_leaf=1, sample_weight=None,
               n_classes=None) -> Split | None:
    """Highest information-gain threshold split of ``(X, y)``.

    Parameters
    ----------
    X : sparse or dense (n_samples, n_features) count matrix
    y : array of int class codes in ``[0, n_classes)``
    candidate_features : iterable of int, optional
        Features to consider; all of them by default.

    Returns ``None`` when no candidate split has positive gain.
    """
    X = check_count_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"X has {X.shape[0]} rows, y has {len(y)}")
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    samples = np.flatnonzero(w > 0).astype(np.int64)
    if len(samples) == 0:
        return None
    if candidate_features is None:
        cand = np.arange(X.shape[1], dtype=np.int64)
    else:
        cand = np.unique(np.asarray(list(candidate_features), dtype=np.int64))
    counts = np.bincount(y[samples], weights=w[samples], minlength=n_classes).astype(np.float64)
    ent = K.gather_entries(X.indptr, X.indices, X.data, samples, 0, len(samples))
    col_pos = np.full(X.shape[1], -1, dtype=np.int64)
    f, thr, gain = K.search_split(*ent, y, w, counts, counts.sum(), cand, col_pos,
                                  float(min_samples_leaf), n_classes)
    if f < 0:
        return None
    return Split(int(f), float(thr), float(gain))


@dataclass
class Tree:
    """Array-encoded binary tree; node 0 is the root, leaves have ``left == -1``.

    ``value[i]`` holds the (bootstrap-weighted) training class counts that
    reached node ``i``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    gain: np.ndarray
    value: np.ndarray
    depth: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def apply(self, X) -> np.ndarray:
        X = check_count_matrix(X)
        return K.apply_tree(X.indptr, X.indices, X.data, self.feature, self.threshold,
                            self.left, self.right)

    def leaf_class(self) -> np.ndarray:
        # argmax keeps the lowest class code on ties
        return np.argmax(self.value, axis=1)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "gain": self.gain.tolist(),
            "value": self.value.tolist(),
            "depth": self.depth.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            gain=np.asarray(d["gain"], dtype=np.float64),
            value=np.asarray(d["value"], dtype=np.float64).reshape(len(d["feature"]), -1),
            depth=np.asarray(d["depth"], dtype=np.int64),
        )


def resolve_max_features(max_features, n_features: int) -> int:
    if n_features == 0:
        return 0
    if max_features in (None, "all"):
        k = n_features
    elif max_features == "sqrt":
        k = int(math.isqrt(n_features))
    elif max_features == "log2":
        k = int(math.log2(n_features))
    elif isinstance(max_features, numbers.Integral):
        k = int(max_features)
    elif isinstance(max_features, numbers.Real) and 0 < max_features <= 1:
        k = int(max_features * n_features)
    else:
        raise ValueError(f"invalid max_features={max_features!r}")
    return max(1, min(k, n_features))


def bootstrap_weights(n_samples: int, rng: np.random.Generator) -> np.ndarray:
    return np.bincount(rng.integers(0, n_samples, n_samples), minlength=n_samples).astype(np.float64)


def tree_rng(random_state: int, tree_index: int) -> np.random.Generator:
    return np.random.default_rng(random_state + tree_index)


def grow_tree(X, y, *, n_classes, max_depth=None, min_samples_split=2, min_samples_leaf=1,
              max_features=None, sample_weight=None, rng=None) -> Tree:
    """Grow one tree; every node draws a fresh candidate feature subset from ``rng``.

    Candidates are drawn among features that take at least two distinct
    values inside the node (constant features cannot split it).
    """
    X = check_count_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(0) if rng is None else rng
    w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    samples = np.flatnonzero(w > 0).astype(np.int64)
    k = resolve_max_features(max_features, X.shape[1])
    seed = int(rng.integers(0, 2**31 - 1))
    arrays = K.build_tree(
        X.indptr.astype(np.int64), X.indices.astype(np.int64), X.data, y, w, samples,
        X.shape[1], n_classes, -1 if max_depth is None else int(max_depth),
        float(min_samples_split), float(min_samples_leaf), k, seed,
    )
    return Tree(*arrays)


class RandomForest(ClassifierMixin, BaseEstimator):
    """Bagged entropy decision trees with majority voting.

    Parameters
    ----------
    n_estimators : int, default=100
    max_depth : int or None, default=None
        ``None`` grows until leaves are pure or unsplittable.
    min_samples_split : int, default=2
    min_samples_leaf : int, default=1
    max_features : {"sqrt", "log2", "all"}, int, float or None, default="sqrt"
        Candidate features drawn per node.
    bootstrap : bool, default=True
    random_state : int, default=0
        Tree ``i`` draws from a generator seeded with ``random_state + i``.
    n_jobs : int, default=1
        Threads used to grow trees and predict. Results do not depend on it.

    Attributes
    ----------
    classes_ : ndarray
    estimators_ : list of Tree
    n_features_in_ : int
    feature_importances_ : ndarray
        Node-weighted entropy gain per feature, normalized to sum to one.
    """

    def __init__(self, n_estimators=100, max_depth=None, min_samples_split=2, min_samples_leaf=1,
                 max_features="sqrt", bootstrap=True, random_state=0, n_jobs=1):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _validate_params(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")

    def _fit_one(self, X, y, i):
        rng = tree_rng(self._seed, i)
        w = bootstrap_weights(X.shape[0], rng) if self.bootstrap else None
        return grow_tree(
            X, y, n_classes=len(self.classes_), max_depth=self.max_depth,
            min_samples_split=self.min_samples_split, min_samples_leaf=self.min_samples_leaf,
            max_features=self.max_features, sample_weight=w, rng=rng,
        )

    def fit(self, X, y):
        self._validate_params()
        X = check_count_matrix(X)
        y = check_labels(y, X.shape[0])
        self.classes_, codes = np.unique(y, return_inverse=True)
        self.n_features_in_ = X.shape[1]
        self._seed = int(self.random_state) if self.random_state is not None else \
            int(np.random.SeedSequence().entropy % (2**31))
        self.estimators_ = Parallel(n_jobs=self.n_jobs, prefer="threads")(
            delayed(self._fit_one)(X, codes.astype(np.int64), i) for i in range(self.n_estimators)
        )
        return self

    def _check_X(self, X):
        check_is_fitted(self, "estimators_")
        X = check_count_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"X has {X.shape[1]} features, forest was trained on {self.n_features_in_}")
        return X

    def votes(self, X) -> np.ndarray:
        """``(n_samples, n_classes)`` count of trees voting for each class."""
        X = self._check_X(X)
        rows = np.arange(X.shape[0])

        def one(tree):
            v = np.zeros((X.shape[0], len(self.classes_)), dtype=np.int64)
            v[rows, tree.leaf_class()[tree.apply(X)]] = 1
            return v

        parts = Parallel(n_jobs=self.n_jobs, prefer="threads")(
            delayed(one)(t) for t in self.estimators_)
        return np.sum(parts, axis=0)

    def predict_proba(self, X) -> np.ndarray:
        """Share of trees voting for each class."""
        return self.votes(X) / len(self.estimators_)

    def predict(self, X) -> np.ndarray:
        # argmax keeps the lowest class on vote ties (Negative < Neutral < Positive)
        return self.classes_[np.argmax(self.votes(X), axis=1)]

    @property
    def feature_importances_(self) -> np.ndarray:
        check_is_fitted(self, "estimators_")
        total = np.zeros(self.n_features_in_)
        for tree in self.estimators_:
            inner = tree.left >= 0
            n_node = tree.value.sum(axis=1)
            imp = np.zeros(self.n_features_in_)
            np.add.at(imp, tree.feature[inner], tree.gain[inner] * n_node[inner] / n_node[0])
            if imp.sum() > 0:
                total += imp / imp.sum()
        return total / total.sum() if total.sum() > 0 else total

    def to_dict(self) -> dict:
        check_is_fitted(self, "estimators_")
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "params": self.get_params(),
            "classes": self.classes_.tolist(),
            "n_features": self.n_features_in_,
            "trees": [t.to_dict() for t in self.estimators_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForest":
        if d.get("format") != FORMAT_NAME or d.get("version") != FORMAT_VERSION:
            raise ValueError(f"not a {FORMAT_NAME} v{FORMAT_VERSION} document")
        forest = cls(**d["params"])
        forest.classes_ = np.asarray(d["classes"])
        forest.n_features_in_ = int(d["n_features"])
        forest.estimators_ = [Tree.from_dict(t) for t in d["trees"]]
        forest._seed = forest.random_state
        return forest

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str) -> "RandomForest":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def train_forest(X, y, **params) -> RandomForest:
    return RandomForest(**params).fit(X, y)


def predict_distribution(forest: RandomForest, x) -> dict:
    """Vote share per class for a single sample."""
    if isinstance(x, Mapping):
        bad = [j for j in x if not 0 <= j < forest.n_features_in_]
        if bad:
            raise DimensionMismatch(
                f"feature index {bad[0]} outside [0, {forest.n_features_in_})")
        row = sp.csr_matrix((list(x.values()), ([0] * len(x), list(x.keys()))),
                            shape=(1, forest.n_features_in_), dtype=np.float64)
    else:
        row = x
    shares = forest.predict_proba(row)[0]
    return {c.item() if hasattr(c, "item") else c: float(s) for c, s in zip(forest.classes_, shares)}
