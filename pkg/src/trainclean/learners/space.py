"""Hyper-parameter spaces: declaration, validation and random draws."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

UNLIMITED = "unlimited"


class HyperparameterError(ValueError):
    pass


@dataclass(frozen=True)
class Param:
    """One searchable (or fixed) hyper-parameter.

    ``kind`` is ``int``, ``real``, ``log-real`` or ``categorical``. An
    integer parameter with ``allow_unlimited`` also accepts the string
    ``"unlimited"``; random draws pick it half of the time. ``fixed``
    parameters are validated but never varied by random search.
    """

    name: str
    kind: str
    default: Any
    low: float | None = None
    high: float | None = None
    choices: tuple | None = None
    allow_unlimited: bool = False
    fixed: bool = False

    def __post_init__(self):
        if self.kind == "categorical":
            if not self.choices:
                raise HyperparameterError(f"{self.name}: empty choice list")
        elif self.kind in ("int", "real", "log-real"):
            if self.low is None or self.high is None or self.low > self.high:
                raise HyperparameterError(f"{self.name}: empty range")
            if self.kind == "log-real" and self.low <= 0:
                raise HyperparameterError(f"{self.name}: log range must be positive")
        else:
            raise HyperparameterError(f"{self.name}: unknown kind {self.kind!r}")
        self.validate(self.default)

    def validate(self, value) -> Any:
        """Return the canonical form of `value` or raise."""
        if self.kind == "categorical":
            if value not in self.choices:
                raise HyperparameterError(f"{self.name}={value!r} not in {list(self.choices)}")
            return value
        if self.kind == "int":
            if self.allow_unlimited and value == UNLIMITED:
                return UNLIMITED
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                if isinstance(value, float) and value.is_integer():
                    value = int(value)
                else:
                    raise HyperparameterError(f"{self.name}={value!r} is not an integer")
            value = int(value)
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise HyperparameterError(f"{self.name}={value!r} is not a number")
            value = float(value)
        if not self.low <= value <= self.high:
            raise HyperparameterError(f"{self.name}={value!r} outside [{self.low}, {self.high}]")
        return value

    def draw(self, rng: np.random.Generator):
        if self.fixed:
            return self.default
        if self.kind == "categorical":
            return self.choices[int(rng.integers(len(self.choices)))]
        if self.kind == "int":
            if self.allow_unlimited and rng.random() < 0.5:
                return UNLIMITED
            return int(rng.integers(int(self.low), int(self.high) + 1))
        if self.kind == "real":
            return float(rng.uniform(self.low, self.high))
        v = math.exp(rng.uniform(math.log(self.low), math.log(self.high)))
        return float(min(max(v, self.low), self.high))

    def describe(self) -> str:
        if self.kind == "categorical":
            return "{" + ", ".join(map(str, self.choices)) + "}"
        tag = {"int": "int", "real": "real", "log-real": "log-real"}[self.kind]
        extra = " or unlimited" if self.allow_unlimited else ""
        return f"{tag}[{self.low:g},{self.high:g}]{extra}"


class HyperparameterSpace:
    def __init__(self, algorithm: str, params):
        self.algorithm = algorithm
        self.params = tuple(params)
        self._by_name = {p.name: p for p in self.params}

    def __iter__(self):
        return iter(self.params)

    def __getitem__(self, name) -> Param:
        return self._by_name[name]

    def names(self):
        return [p.name for p in self.params]

    def defaults(self) -> dict:
        return {p.name: p.default for p in self.params}

    def validate(self, assignment) -> dict:
        """Complete `assignment` with defaults and check every value."""
        unknown = set(assignment) - set(self._by_name)
        if unknown:
            raise HyperparameterError(
                f"{self.algorithm}: unknown hyper-parameter(s) {sorted(unknown)}")
        out = {}
        for p in self.params:
            out[p.name] = p.validate(assignment.get(p.name, p.default))
        return out

    def draw(self, rng: np.random.Generator) -> dict:
        return {p.name: p.draw(rng) for p in self.params}


def _int(name, default, low, high, **kw):
    return Param(name, "int", default, low, high, **kw)


def _real(name, default, low, high):
    return Param(name, "real", default, low, high)


def _logreal(name, default, low, high):
    return Param(name, "log-real", default, low, high)


def _cat(name, default, *choices, fixed=False):
    return Param(name, "categorical", default, choices=tuple(choices), fixed=fixed)


SPACES = {
    "knn": HyperparameterSpace("knn", [
        _int("k", 5, 1, 25),
        _cat("weighting", "uniform", "uniform", "inverse-distance"),
        _cat("distance", "mixed-euclidean-overlap", "mixed-euclidean-overlap", fixed=True),
    ]),
    "naive_bayes": HyperparameterSpace("naive_bayes", [
        _cat("numeric_model", "gaussian", "gaussian", "histogram-10bin"),
        _real("laplace", 1.0, 0.1, 5.0),
    ]),
    "decision_tree": HyperparameterSpace("decision_tree", [
        _int("min_leaf", 2, 1, 20),
        _real("confidence", 0.25, 0.05, 0.5),
        _cat("pruning", "on", "on", "off"),
    ]),
    "random_forest": HyperparameterSpace("random_forest", [
        _int("trees", 50, 10, 200),
        _cat("features_per_split", "sqrt", "sqrt", "log2", "all"),
        _int("max_depth", UNLIMITED, 1, 30, allow_unlimited=True),
        _cat("bootstrap", True, True, False, fixed=True),
    ]),
    "rule_learner": HyperparameterSpace("rule_learner", [
        _int("min_coverage", 2, 1, 10),
        _cat("pruning", "on", "on", "off"),
        _int("optimization_passes", 1, 0, 3),
    ]),
    "mlp": HyperparameterSpace("mlp", [
        _int("hidden_units", 8, 2, 64),
        _logreal("learning_rate", 0.1, 1e-4, 1e-1),
        _int("epochs", 100, 10, 500),
        _real("momentum", 0.2, 0.0, 0.9),
    ]),
    "logistic": HyperparameterSpace("logistic", [
        _logreal("l2", 1e-4, 1e-6, 1e1),
        _int("epochs", 200, 50, 1000),
        _logreal("learning_rate", 0.3, 1e-4, 1e0),
    ]),
    "locally_weighted": HyperparameterSpace("locally_weighted", [
        _int("neighborhood", 20, 5, 50),
        _cat("kernel", "linear", "linear", "inverse"),
    ]),
}
