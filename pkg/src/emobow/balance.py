"""Class rebalancing by random undersampling or duplication-based oversampling."""

from __future__ import annotations

import enum

import numpy as np
from sklearn.base import BaseEstimator

from .corpus import LabeledSet, PolarityClass


class SamplingRegime(enum.Enum):
    NATURAL = "natural"
    UNDERSAMPLE = "under"
    OVERSAMPLE = "over"


class EmptyClass(ValueError):
    def __init__(self, cls):
        self.cls = cls
        super().__init__(f"class {cls!r} has no members")


def _class_members(y: np.ndarray, classes) -> list[np.ndarray]:
    members = []
    for c in classes:
        idx = np.flatnonzero(y == c)
        if len(idx) == 0:
            raise EmptyClass(PolarityClass(c) if c in PolarityClass._value2member_map_ else c)
        members.append(idx)
    return members


def undersample_indices(y, seed: int, classes=None) -> np.ndarray:
    """Indices keeping ``min`` class count items per class, original order preserved."""
    y = np.asarray(y)
    classes = np.unique(y) if classes is None else classes
    members = _class_members(y, classes)
    target = min(len(m) for m in members)
    rng = np.random.default_rng(seed)
    keep = [rng.choice(m, size=target, replace=False) for m in members]
    return np.sort(np.concatenate(keep)) if keep else np.zeros(0, dtype=np.int64)


def oversample_indices(y, seed: int, classes=None) -> np.ndarray:
    """Indices of every item followed by duplicates raising each class to the max count.

    Duplicates of a class are taken cyclically from a seeded shuffle of its
    members, so every member is copied once before any is copied twice.
    """
    y = np.asarray(y)
    classes = np.unique(y) if classes is None else classes
    members = _class_members(y, classes)
    target = max((len(m) for m in members), default=0)
    rng = np.random.default_rng(seed)
    extra = []
    for m in members:
        order = rng.permutation(m)
        need = target - len(m)
        if need:
            extra.append(np.resize(order, need))
    return np.concatenate([np.arange(len(y))] + extra).astype(np.int64)


def undersample(ds: LabeledSet, seed: int) -> LabeledSet:
    return ds.subset(undersample_indices(ds.labels, seed))


def oversample(ds: LabeledSet, seed: int) -> LabeledSet:
    return ds.subset(oversample_indices(ds.labels, seed))


def resample_indices(y, regime: SamplingRegime | str, seed: int) -> np.ndarray:
    regime = SamplingRegime(regime)
    if regime is SamplingRegime.UNDERSAMPLE:
        return undersample_indices(y, seed)
    if regime is SamplingRegime.OVERSAMPLE:
        return oversample_indices(y, seed)
    return np.arange(len(y), dtype=np.int64)


class _BaseSampler(BaseEstimator):
    def __init__(self, random_state=0):
        self.random_state = random_state

    def fit_resample(self, X, y):
        """Return ``(X_res, y_res)``; ``X`` may be a list or anything indexable by arrays."""
        y = np.asarray(y)
        idx = self._indices(y)
        self.sample_indices_ = idx
        if isinstance(X, list):
            return [X[i] for i in idx], y[idx]
        return X[idx], y[idx]


class RandomUnderSampler(_BaseSampler):
    """Drop surplus majority-class items down to the minority count."""

    def _indices(self, y):
        return undersample_indices(y, self.random_state)


class RandomOverSampler(_BaseSampler):
    """Copy minority-class items up to the majority count."""

    def _indices(self, y):
        return oversample_indices(y, self.random_state)
