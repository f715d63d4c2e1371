"""Repeated stratified cross-validation with optional training-split filters.

Every routine here evaluates on the complete test folds; a ``keep`` mask
only removes rows from the training side. Results are memoised in an
:class:`EvalCache` keyed on the dataset digest, learner, protocol and mask,
so overlapping filter ensembles never retrain the same model twice.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .data import Dataset, Partition, stratified_partition
from .learners import LearnerError, LearnerSpec, fit_arrays, predict_many
from .learners.encoding import Schema
from .seeding import derive_seed


class EmptyTrainingSplit(LearnerError):
    """A filtered training split has no rows left."""


@dataclass(frozen=True)
class Protocol:
    runs: int = 5
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1 or self.folds < 2:
            raise ValueError("protocol needs runs >= 1 and folds >= 2")

    def to_dict(self):
        return {"runs": self.runs, "folds": self.folds, "seed": self.seed}


class EvalCache:
    """Thread-safe memo for partitions and cross-validated predictions."""

    def __init__(self):
        self._lock = threading.Lock()
        self._partitions: dict = {}
        self._predictions: dict = {}
        self.hits = 0
        self.misses = 0

    def partition(self, dataset: Dataset, protocol: Protocol) -> Partition:
        key = (dataset.fingerprint(), protocol)
        part = self._partitions.get(key)
        if part is None:
            part = stratified_partition(dataset, protocol.folds, protocol.runs, protocol.seed)
            with self._lock:
                self._partitions.setdefault(key, part)
        return part

    def get(self, key):
        with self._lock:
            out = self._predictions.get(key)
            if out is None:
                self.misses += 1
            else:
                self.hits += 1
            return out

    def put(self, key, value):
        with self._lock:
            self._predictions.setdefault(key, value)

    def __len__(self):
        return len(self._predictions)


_DEFAULT_CACHE = EvalCache()


def default_cache() -> EvalCache:
    return _DEFAULT_CACHE


def fit_seed(protocol: Protocol, run: int, fold: int) -> int:
    """Training seed for one (run, fold) cell; shared by every learner."""
    return derive_seed(protocol.seed, "fit", run, fold)


def cv_predictions(spec: LearnerSpec, dataset: Dataset, protocol: Protocol,
                   keep=None, cache: EvalCache | None = None) -> np.ndarray:
    """Held-out predictions, shape ``(runs, n)``, for every instance.

    `keep` is an optional boolean mask over rows; rows outside it are
    dropped from training splits but still predicted when they fall in a
    test fold.
    """
    cache = cache if cache is not None else _DEFAULT_CACHE
    if keep is not None:
        keep = np.asarray(keep)
        if keep.dtype != bool or keep.shape != (len(dataset),):
            raise ValueError(f"keep must be a boolean mask of length {len(dataset)}")
    keep_key = None if keep is None or np.all(keep) else np.packbits(keep).tobytes()
    key = (dataset.fingerprint(), spec, protocol, keep_key)
    hit = cache.get(key)
    if hit is not None:
        return hit
    part = cache.partition(dataset, protocol)
    schema = Schema.of(dataset)
    out = np.empty((protocol.runs, len(dataset)), dtype=np.int64)
    for r in range(protocol.runs):
        for f, (train_pos, test_pos) in enumerate(part.folds(r)):
            if keep_key is not None:
                train_pos = train_pos[keep[train_pos]]
            if not len(train_pos):
                raise EmptyTrainingSplit(
                    f"run {r} fold {f}: filtered training split is empty")
            model = fit_arrays(spec, dataset.X[train_pos], dataset.y[train_pos], schema,
                               dataset.classes, fit_seed(protocol, r, f))
            out[r, test_pos] = predict_many(model, dataset.X[test_pos])
    out.flags.writeable = False
    cache.put(key, out)
    return out


def correct_counts(spec, dataset, protocol, keep=None, cache=None) -> np.ndarray:
    """Number of runs in which each instance was predicted correctly."""
    pred = cv_predictions(spec, dataset, protocol, keep, cache)
    return (pred == dataset.y[None, :]).sum(axis=0)


def run_accuracies(spec, dataset, protocol, keep=None, cache=None) -> np.ndarray:
    pred = cv_predictions(spec, dataset, protocol, keep, cache)
    return (pred == dataset.y[None, :]).mean(axis=1)


def cv_accuracy(target: LearnerSpec, dataset: Dataset, protocol: Protocol = Protocol(),
                cache: EvalCache | None = None) -> float:
    """Mean over runs of the fraction of instances predicted correctly."""
    return float(np.mean(run_accuracies(target, dataset, protocol, None, cache)))
