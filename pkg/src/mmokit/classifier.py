"""KNN classification and k-fold cross-validated error rate.

The cross-validation pipeline min-max scales every feature to [0, 1] using the
statistics of the training folds only; KNN is scale sensitive and the wrapper
objective would otherwise be dominated by wide-range features. The bare
``knn_classify`` primitive works on features exactly as given.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RandomStream

__all__ = ["TabularDataset", "FoldPlan", "knn_classify", "cv_error_rate", "CrossValKNN"]


@dataclass(frozen=True)
class TabularDataset:
    """Numeric sample matrix with integer class labels in 0..class_count-1."""

    samples: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if samples.ndim != 2 or samples.shape[0] < 2 or samples.shape[1] < 1:
            raise ValueError("samples must be an (n >= 2, d >= 1) matrix")
        if labels.shape != (samples.shape[0],):
            raise ValueError("labels must be one per sample")
        if np.any(np.isnan(samples)):
            raise ValueError("samples contain NaN values")
        if labels.min() < 0 or labels.max() >= self.class_count:
            raise ValueError("labels must lie in 0..class_count-1")
        samples.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_features(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of each sample to one of ``fold_count`` folds, sizes within 1."""

    fold_of_sample: np.ndarray
    fold_count: int

    def __post_init__(self):
        assign = np.asarray(self.fold_of_sample, dtype=np.int64)
        if assign.ndim != 1 or len(assign) < self.fold_count:
            raise ValueError("need at least one sample per fold")
        if assign.min() < 0 or assign.max() >= self.fold_count:
            raise ValueError("fold ids must lie in 0..fold_count-1")
        sizes = np.bincount(assign, minlength=self.fold_count)
        if sizes.max() - sizes.min() > 1:
            raise ValueError("fold sizes must differ by at most one")
        assign.flags.writeable = False
        object.__setattr__(self, "fold_of_sample", assign)

    @classmethod
    def build(cls, n: int, fold_count: int, seed: int) -> "FoldPlan":
        """Uniform random fold assignment, deterministic in (n, fold_count, seed)."""
        perm = RandomStream(seed).rng.permutation(n)
        assign = np.empty(n, dtype=np.int64)
        assign[perm] = np.arange(n) % fold_count
        return cls(assign, fold_count)


def _vote(neighbor_labels: np.ndarray, class_count: int) -> np.ndarray:
    """Majority vote per row; ties go to the smallest class id."""
    n = neighbor_labels.shape[0]
    counts = np.zeros((n, class_count), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(n), neighbor_labels.shape[1]), neighbor_labels.ravel()), 1)
    return counts.argmax(axis=1)


def knn_classify(train_samples, train_labels, query, k: int, mask) -> int:
    """Classify one query by majority vote among its k nearest training samples.

    Distances are Euclidean over the masked features only, on the features as
    given (no scaling). k is capped at the training size. Equal distances keep
    training order (lower index first); vote ties pick the smallest class id.
    """
    train = np.asarray(train_samples, dtype=float)
    labels = np.asarray(train_labels, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)
    if train.ndim != 2 or len(train) < 1:
        raise ValueError("need at least one training sample")
    if k < 1:
        raise ValueError("k must be positive")
    if not mask.any():
        raise ValueError("mask selects no features")
    q = np.asarray(query, dtype=float)[mask]
    diffs = train[:, mask] - q
    d2 = np.einsum("ij,ij->i", diffs, diffs)
    order = np.argsort(d2, kind="stable")
    k_eff = min(k, len(train))
    votes = labels[order[:k_eff]]
    counts = np.bincount(votes)
    return int(counts.argmax())


class CrossValKNN:
    """Reusable cross-validation engine for one (dataset, k, fold plan) triple.

    Per-fold scaled matrices are precomputed once so that evaluating a feature
    mask costs a few small matrix products; wrapper feature selection calls
    this thousands of times per run.
    """

    def __init__(self, dataset: TabularDataset, k: int, plan: FoldPlan):
        if len(plan.fold_of_sample) != dataset.n_samples:
            raise ValueError("fold plan does not match dataset size")
        if k < 1:
            raise ValueError("k must be positive")
        self.dataset = dataset
        self.k = k
        self.plan = plan
        self._folds = []
        for f in range(plan.fold_count):
            te = plan.fold_of_sample == f
            tr = ~te
            train = dataset.samples[tr]
            test = dataset.samples[te]
            mn = train.min(axis=0)
            span = train.max(axis=0) - mn
            denom = np.where(span > 0, span, 1.0)
            strain = (train - mn) / denom
            stest = (test - mn) / denom
            self._folds.append(
                (
                    strain,
                    stest,
                    strain**2,
                    stest**2,
                    dataset.labels[tr],
                    dataset.labels[te],
                )
            )

    def error_rate(self, mask) -> float:
        """Pooled misclassification rate of the masked features over all folds."""
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            raise ValueError("mask selects no features")
        wrong = 0
        for strain, stest, strain2, stest2, ltrain, ltest in self._folds:
            a2 = stest2[:, mask].sum(axis=1)
            b2 = strain2[:, mask].sum(axis=1)
            cross = stest[:, mask] @ strain[:, mask].T
            d2 = a2[:, None] + b2[None, :] - 2.0 * cross
            np.maximum(d2, 0.0, out=d2)
            k_eff = min(self.k, strain.shape[0])
            order = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]
            pred = _vote(ltrain[order], self.dataset.class_count)
            wrong += int((pred != ltest).sum())
        return wrong / self.dataset.n_samples


def cv_error_rate(dataset: TabularDataset, mask, k: int, plan: FoldPlan) -> float:
    """Cross-validated KNN error rate for one feature mask (one-off convenience).

    Each fold is classified using the remaining folds as training data, with
    training-fold min-max scaling; errors are pooled over all folds.
    """
    return CrossValKNN(dataset, k, plan).error_rate(mask)
