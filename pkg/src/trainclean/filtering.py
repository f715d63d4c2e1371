"""Detrimental-instance filters.

``run_la`` is the common evaluator: hardness is estimated once over the
full dataset with the filter ensemble, instances strictly below ``phi`` are
removed from every training split, and test folds stay complete.
``ensemble_filter`` applies a fixed ensemble, ``adaptive_filter`` grows the
ensemble greedily, and ``exhaustive_best_subset`` enumerates every training
subset of a tiny dataset as a ground-truth oracle.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cv import EmptyTrainingSplit, EvalCache, Protocol, default_cache, run_accuracies
from .data import Dataset
from .hardness import HardnessEstimate, hardness_from_members
from .learners import LearnerSpec

log = logging.getLogger(__name__)

EXHAUSTIVE_CAP = 15


class FilterError(ValueError):
    pass


@dataclass
class FilterOutcome:
    phi: float
    ensemble: tuple[LearnerSpec, ...]
    removed_ids: frozenset[int]
    retained: Dataset
    hardness: HardnessEstimate | None = None
    baseline_accuracy: float | None = None
    final_accuracy: float | None = None
    trace: list[tuple[tuple[LearnerSpec, ...], float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "phi": self.phi,
            "ensemble": [s.to_dict() for s in self.ensemble],
            "removed_ids": sorted(self.removed_ids),
            "baseline_accuracy": self.baseline_accuracy,
            "final_accuracy": self.final_accuracy,
            "trace": [{"ensemble": [s.label for s in ens], "accuracy": acc}
                      for ens, acc in self.trace],
        }


def _check_phi(phi):
    if not 0.0 < phi <= 1.0:
        raise FilterError(f"phi must lie in (0, 1], got {phi}")


def _keep_mask(dataset, ensemble, phi, protocol, cache) -> np.ndarray | None:
    if not ensemble:
        return None
    est = hardness_from_members(dataset, ensemble, protocol, cache)
    return ~est.below(phi)


def run_la(dataset: Dataset, target: LearnerSpec, filter_ensemble: Sequence[LearnerSpec],
           phi: float, protocol: Protocol = Protocol(), cache: EvalCache | None = None) -> float:
    """Cross-validated accuracy of `target` trained on filtered splits.

    An empty `filter_ensemble` means no filtering. Raises
    :class:`~trainclean.cv.EmptyTrainingSplit` if filtering empties a
    training split.
    """
    _check_phi(phi)
    cache = cache if cache is not None else default_cache()
    keep = _keep_mask(dataset, tuple(filter_ensemble), phi, protocol, cache)
    return float(np.mean(run_accuracies(target, dataset, protocol, keep, cache)))


def _outcome(dataset, ensemble, phi, protocol, cache, hardness=None) -> FilterOutcome:
    if hardness is None:
        hardness = hardness_from_members(dataset, ensemble, protocol, cache)
    removed = hardness.below(phi)
    if removed.all():
        raise FilterError(f"phi={phi} removes every instance")
    removed_ids = frozenset(int(i) for i in hardness.ids[removed])
    retained = dataset.take(np.flatnonzero(~removed))
    return FilterOutcome(phi, tuple(ensemble), removed_ids, retained, hardness)


def ensemble_filter(dataset: Dataset, ensemble: Sequence[LearnerSpec], phi: float,
                    protocol: Protocol = Protocol(), hardness: HardnessEstimate | None = None,
                    target: LearnerSpec | None = None,
                    cache: EvalCache | None = None) -> FilterOutcome:
    """Remove instances whose ensemble hardness is strictly below `phi`.

    If `target` is given the outcome also carries the target's unfiltered
    and filtered cross-validated accuracies.
    """
    _check_phi(phi)
    ensemble = tuple(ensemble)
    if not ensemble:
        raise FilterError("ensemble must not be empty")
    cache = cache if cache is not None else default_cache()
    out = _outcome(dataset, ensemble, phi, protocol, cache, hardness)
    if target is not None:
        out.baseline_accuracy = run_la(dataset, target, (), phi, protocol, cache)
        out.final_accuracy = float(np.mean(run_accuracies(
            target, dataset, protocol, ~out.hardness.below(phi), cache)))
        out.trace = [((), out.baseline_accuracy), (ensemble, out.final_accuracy)]
    return out


def adaptive_filter(dataset: Dataset, target: LearnerSpec, candidates: Sequence[LearnerSpec],
                    phi: float, protocol: Protocol = Protocol(),
                    cache: EvalCache | None = None) -> FilterOutcome:
    """Greedily build the filter ensemble that maximises `target`'s CV accuracy.

    Starts from the unfiltered accuracy; each sweep tries adding every
    remaining candidate and keeps the best one only if it strictly beats
    the current accuracy. Ties go to the earlier candidate. A candidate
    whose filter would empty a training split is skipped for that sweep.
    """
    _check_phi(phi)
    pool = list(candidates)
    if not pool:
        raise FilterError("candidate list must not be empty")
    cache = cache if cache is not None else default_cache()
    chosen: list[LearnerSpec] = []
    curr = run_la(dataset, target, (), phi, protocol, cache)
    trace = [((), curr)]
    while pool:
        best_acc, best_idx = curr, None
        for i, g in enumerate(pool):
            try:
                acc = run_la(dataset, target, chosen + [g], phi, protocol, cache)
            except EmptyTrainingSplit:
                log.debug("skipping %s: filter empties a training split", g.label)
                continue
            if acc > best_acc:
                best_acc, best_idx = acc, i
        if best_idx is None:
            break
        chosen.append(pool.pop(best_idx))
        curr = best_acc
        trace.append((tuple(chosen), curr))
    if chosen:
        out = _outcome(dataset, chosen, phi, protocol, cache)
    else:
        out = FilterOutcome(phi, (), frozenset(), dataset)
    out.baseline_accuracy = trace[0][1]
    out.final_accuracy = curr
    out.trace = trace
    return out


def exhaustive_best_subset(dataset: Dataset, target: LearnerSpec,
                           protocol: Protocol = Protocol(runs=1, folds=3),
                           cache: EvalCache | None = None) -> tuple[frozenset[int], float]:
    """Best training filter over all non-empty id subsets (tiny datasets only).

    Each subset is applied as the per-fold training filter, with test folds
    complete, exactly like :func:`run_la`. Subsets that empty a training
    split are infeasible. Ties prefer larger subsets, then the
    lexicographically smallest sorted id tuple.
    """
    n = len(dataset)
    if n > EXHAUSTIVE_CAP:
        raise FilterError(f"exhaustive search is capped at {EXHAUSTIVE_CAP} instances, got {n}")
    scratch = EvalCache()
    if cache is not None:
        scratch._partitions = cache._partitions
    ids = [int(i) for i in dataset.ids]
    best_key, best = None, None
    for size in range(n, 0, -1):
        for combo in itertools.combinations(range(n), size):
            keep = np.zeros(n, dtype=bool)
            keep[list(combo)] = True
            try:
                acc = float(np.mean(run_accuracies(target, dataset, protocol, keep, scratch)))
            except EmptyTrainingSplit:
                continue
            key = (acc, size, tuple(sorted(ids[i] for i in combo)))
            if best_key is None or _better(key, best_key):
                best_key, best = key, (frozenset(ids[i] for i in combo), acc)
        scratch._predictions.clear()
    return best


def _better(a, b) -> bool:
    if a[0] != b[0]:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] > b[1]
    return a[2] < b[2]
