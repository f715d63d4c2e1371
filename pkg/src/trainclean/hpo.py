"""Random hyper-parameter search scored by repeated cross-validation."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .cv import EvalCache, Protocol, cv_accuracy
from .data import Dataset
from .learners import LearnerSpec, hyperparameter_space
from .seeding import derive_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Trial:
    params: dict
    accuracy: float
    error: str | None = None


@dataclass(frozen=True)
class HpoResult:
    algorithm: str
    trials: tuple[Trial, ...]
    best: int
    n_trials: int
    seed: int

    @property
    def best_params(self) -> dict:
        return self.trials[self.best].params

    @property
    def best_accuracy(self) -> float:
        return self.trials[self.best].accuracy

    @property
    def best_spec(self) -> LearnerSpec:
        return LearnerSpec.of(self.algorithm, self.best_params)

    def to_dict(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "n_trials": self.n_trials,
            "seed": self.seed,
            "trials": [{"params": t.params, "accuracy": t.accuracy} for t in self.trials],
            "best_params": self.best_params,
            "best_accuracy": self.best_accuracy,
        }
        failed = [{"trial": i, "error": t.error} for i, t in enumerate(self.trials) if t.error]
        if failed:
            out["failures"] = failed
        return out


def draw_assignments(algorithm: str, n_trials: int, seed: int) -> list[dict]:
    """The first `n_trials` assignments of the search stream for `seed`.

    Draws are sequential, so a longer search extends a shorter one.
    """
    space = hyperparameter_space(algorithm)
    rng = derive_rng(seed, "hpo", algorithm)
    return [space.draw(rng) for _ in range(n_trials)]


def random_search(algorithm: str, dataset: Dataset, n_trials: int = 10,
                  protocol: Protocol = Protocol(), cache: EvalCache | None = None) -> HpoResult:
    """Evaluate `n_trials` random assignments and keep the most accurate.

    All trials share the protocol's partition. A trial that raises scores 0
    and records the error; the first of several equally accurate trials
    wins.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    trials = []
    for params in draw_assignments(algorithm, n_trials, protocol.seed):
        try:
            acc = cv_accuracy(LearnerSpec.of(algorithm, params), dataset, protocol, cache)
            trials.append(Trial(params, acc))
        except Exception as exc:  # a failed draw must not abort the search
            log.warning("%s trial %s failed: %s", algorithm, params, exc)
            trials.append(Trial(params, 0.0, f"{type(exc).__name__}: {exc}"))
    best = max(range(len(trials)), key=lambda i: (trials[i].accuracy, -i))
    return HpoResult(algorithm, tuple(trials), best, n_trials, protocol.seed)
