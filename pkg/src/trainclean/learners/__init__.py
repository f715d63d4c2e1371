"""From-scratch classifier roster with declared hyper-parameter spaces.

>>> spec = LearnerSpec.default("knn")
>>> model = train(spec.algorithm, spec.hyperparameters, dataset, seed=0)  # doctest: +SKIP
>>> predict(model, dataset.instances[0])  # doctest: +SKIP

Models only ever predict classes present in their training data; a
training set holding a single class yields a constant classifier.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from ..seeding import derive_rng
from .encoding import Schema
from .naive_bayes import NaiveBayes
from .neighbors import KNN, LocallyWeighted
from .neural import MLP, Logistic
from .rules import RuleLearner
from .space import SPACES, UNLIMITED, HyperparameterError, HyperparameterSpace, Param
from .tree import DecisionTree, RandomForest

ALGORITHMS = ("knn", "naive_bayes", "decision_tree", "random_forest",
              "rule_learner", "mlp", "logistic", "locally_weighted")

__all__ = [
    "ALGORITHMS", "UNLIMITED", "HyperparameterError", "HyperparameterSpace", "LearnerError",
    "LearnerSpec", "Param", "TrainedModel", "default_hyperparameters", "hyperparameter_space",
    "predict", "predict_many", "register_learner", "roster", "train",
]


class LearnerError(ValueError):
    pass


class _Constant:
    def __init__(self, label):
        self.label = label

    def predict(self, X):
        return np.full(len(X), self.label, dtype=np.int64)


def _stub(pick):
    def factory(X, y, n_classes, schema, params, seed):
        counts = np.bincount(y, minlength=n_classes)
        return _Constant(int(pick(counts)))
    return factory


def _most_frequent(counts):
    return int(np.argmax(counts))


def _least_frequent(counts):
    return int(np.argmin(np.where(counts > 0, counts, counts.max() + 1)))


_FACTORIES: dict[str, Callable] = {
    "knn": lambda X, y, c, s, p, seed: KNN(X, y, c, s, p),
    "naive_bayes": lambda X, y, c, s, p, seed: NaiveBayes(X, y, c, s, p),
    "decision_tree": lambda X, y, c, s, p, seed: DecisionTree(X, y, c, s, p),
    "random_forest": lambda X, y, c, s, p, seed: RandomForest(X, y, c, s, p, seed=seed),
    "rule_learner": lambda X, y, c, s, p, seed: RuleLearner(X, y, c, s, p, derive_rng(seed, "rules")),
    "mlp": lambda X, y, c, s, p, seed: MLP(X, y, c, s, p, derive_rng(seed, "mlp")),
    "logistic": lambda X, y, c, s, p, seed: Logistic(X, y, c, s, p),
    "locally_weighted": lambda X, y, c, s, p, seed: LocallyWeighted(X, y, c, s, p),
    # diagnostic stubs; not part of the roster
    "majority": _stub(_most_frequent),
    "minority": _stub(_least_frequent),
}
_SPACES: dict[str, HyperparameterSpace] = dict(SPACES)
_SPACES["majority"] = HyperparameterSpace("majority", [])
_SPACES["minority"] = HyperparameterSpace("minority", [])


def register_learner(name: str, factory: Callable, space: HyperparameterSpace | None = None):
    """Add a learner under `name`.

    `factory(X, y, n_classes, schema, params, seed)` must return an object
    whose ``predict(X)`` yields labels in ``range(n_classes)``.
    """
    _FACTORIES[name] = factory
    _SPACES[name] = space or HyperparameterSpace(name, [])


def hyperparameter_space(algorithm: str) -> HyperparameterSpace:
    try:
        return _SPACES[algorithm]
    except KeyError:
        raise LearnerError(f"unknown algorithm {algorithm!r}") from None


def default_hyperparameters(algorithm: str) -> dict:
    return hyperparameter_space(algorithm).defaults()


@dataclass(frozen=True)
class LearnerSpec:
    """An algorithm id plus a complete, validated hyper-parameter assignment."""

    algorithm: str
    params: tuple[tuple[str, Any], ...] = ()

    @classmethod
    def of(cls, algorithm: str, params: dict | None = None) -> "LearnerSpec":
        full = hyperparameter_space(algorithm).validate(dict(params or {}))
        return cls(algorithm, tuple(full.items()))

    @classmethod
    def default(cls, algorithm: str) -> "LearnerSpec":
        return cls.of(algorithm)

    @property
    def hyperparameters(self) -> dict:
        return dict(self.params)

    @property
    def label(self) -> str:
        if self.hyperparameters == default_hyperparameters(self.algorithm):
            return self.algorithm
        diff = {k: v for k, v in self.params if default_hyperparameters(self.algorithm)[k] != v}
        inner = ",".join(f"{k}={_fmt(v)}" for k, v in diff.items())
        return f"{self.algorithm}({inner})"

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "params": self.hyperparameters}

    @classmethod
    def from_dict(cls, d) -> "LearnerSpec":
        if isinstance(d, str):
            return cls.default(d)
        return cls.of(d["algorithm"], d.get("params") or {})

    def to_json(self) -> str:
        return json.dumps(self.hyperparameters)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def roster() -> list[LearnerSpec]:
    """Every roster algorithm at its default hyper-parameters."""
    return [LearnerSpec.default(a) for a in ALGORITHMS]


@dataclass(frozen=True, eq=False)
class TrainedModel:
    algorithm: str
    params: tuple
    classes: tuple[str, ...]
    present: tuple[int, ...]
    schema: Schema
    state: Any

    @property
    def hyperparameters(self) -> dict:
        return dict(self.params)


def fit_arrays(spec: LearnerSpec, X, y, schema: Schema, classes, seed: int) -> TrainedModel:
    """Train on raw arrays (labels index into `classes`)."""
    if len(y) == 0:
        raise LearnerError("cannot train on an empty training set")
    present = np.unique(y)
    if len(present) == 1:
        state = _Constant(0)
    else:
        factory = _FACTORIES[spec.algorithm]
        compact = np.searchsorted(present, y)
        state = factory(X, compact, len(present), schema, spec.hyperparameters, seed)
    return TrainedModel(spec.algorithm, spec.params, tuple(classes),
                        tuple(int(c) for c in present), schema, state)


def train(algorithm: str, params: dict | None, dataset, seed: int = 0) -> TrainedModel:
    """Induce a model of `algorithm` with hyper-parameters `params` on `dataset`.

    Deterministic in (algorithm, params, dataset, seed).
    """
    if algorithm not in _FACTORIES:
        raise LearnerError(f"unknown algorithm {algorithm!r}")
    spec = LearnerSpec.of(algorithm, params)
    if len(dataset) == 0:
        raise LearnerError("cannot train on an empty training set")
    return fit_arrays(spec, dataset.X, dataset.y, Schema.of(dataset), dataset.classes, seed)


def predict_many(model: TrainedModel, X) -> np.ndarray:
    X = getattr(X, "X", X)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.schema.width:
        raise LearnerError(f"expected {model.schema.width} feature columns, got shape {X.shape}")
    present = np.asarray(model.present, dtype=np.int64)
    return present[model.state.predict(X)]


def predict(model: TrainedModel, instance) -> int:
    values = getattr(instance, "values", instance)
    if len(values) != model.schema.width:
        raise LearnerError(f"instance has {len(values)} values, model expects {model.schema.width}")
    row = []
    for v, nom, k in zip(values, model.schema.nominal, model.schema.n_categories):
        if v is None or (isinstance(v, float) and math.isnan(v)):
            row.append(math.nan)
            continue
        if nom and not (0 <= int(v) < k and float(v).is_integer()):
            raise LearnerError(f"category index {v!r} out of range")
        row.append(float(v))
    return int(predict_many(model, np.array([row]))[0])
