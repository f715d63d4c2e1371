"""Instance hardness: ensemble-averaged probability of correct classification.

For each run of the repeated cross-validation protocol every ensemble
member is trained on the same train splits and scored 1/0 on each held-out
instance. An instance's estimate is the mean of those indicators over
members and runs, so ensemble estimates are sums of per-member counts and
members can be cached independently.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cv import EvalCache, Protocol, correct_counts
from .data import Dataset
from .learners import LearnerSpec


@dataclass(frozen=True)
class HardnessEstimate:
    ids: np.ndarray
    correct: np.ndarray
    denominator: int
    ensemble: tuple[LearnerSpec, ...]
    protocol: Protocol

    @property
    def p_correct(self) -> np.ndarray:
        return self.correct / self.denominator

    def as_dict(self) -> dict[int, float]:
        return {int(i): float(p) for i, p in zip(self.ids, self.p_correct)}

    def below(self, phi: float) -> np.ndarray:
        """Boolean mask of instances whose estimate is strictly below `phi`."""
        # compare on integer counts to avoid float round-off at the boundary
        return self.correct < phi * self.denominator - 1e-9

    def provenance(self) -> dict:
        return {
            "ensemble": [s.to_dict() for s in self.ensemble],
            "protocol": self.protocol.to_dict(),
            "denominator": self.denominator,
        }


def estimate_hardness(dataset: Dataset, ensemble: Sequence[LearnerSpec], runs: int = 5,
                      folds: int = 10, seed: int = 0, cache: EvalCache | None = None,
                      jobs: int = 1) -> HardnessEstimate:
    """Estimate ``p(y_i | x_i)`` for every instance of `dataset`.

    Parameters
    ----------
    dataset : Dataset
        Needs at least `folds` instances.
    ensemble : sequence of LearnerSpec
        Equal-weight members; duplicates count twice.
    runs, folds, seed
        Repeated stratified CV protocol. Members share every partition.
    cache : EvalCache, optional
        Memo for per-member predictions.
    jobs : int
        Members evaluated concurrently in threads; the sum is order-free
        so the result does not depend on scheduling.

    Raises
    ------
    ValueError
        Empty ensemble or too few instances for the fold count.
    """
    ensemble = tuple(ensemble)
    if not ensemble:
        raise ValueError("ensemble must not be empty")
    if len(dataset) < folds:
        raise ValueError(f"dataset has {len(dataset)} instances, fewer than {folds} folds")
    protocol = Protocol(runs, folds, seed)
    return hardness_from_members(dataset, ensemble, protocol, cache, jobs)


def hardness_from_members(dataset, ensemble, protocol, cache=None, jobs=1) -> HardnessEstimate:
    ensemble = tuple(ensemble)
    if jobs > 1 and len(ensemble) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(jobs) as pool:
            parts = list(pool.map(lambda s: correct_counts(s, dataset, protocol, cache=cache),
                                  ensemble))
    else:
        parts = [correct_counts(s, dataset, protocol, cache=cache) for s in ensemble]
    total = np.zeros(len(dataset), dtype=np.int64)
    for p in parts:
        total += p
    return HardnessEstimate(dataset.ids.copy(), total, len(ensemble) * protocol.runs,
                            ensemble, protocol)


def write_hardness(estimate: HardnessEstimate, dataset: Dataset, csv_path, json_path) -> None:
    """CSV of (instance_id, p_correct, label) plus a JSON provenance sidecar."""
    pos = dataset.positions(estimate.ids)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance_id", "p_correct", "label"])
        for i, p, row in zip(estimate.ids, estimate.p_correct, pos):
            w.writerow([int(i), repr(float(p)), dataset.classes[dataset.y[row]]])
    with open(json_path, "w") as fh:
        json.dump(estimate.provenance(), fh, indent=2)
        fh.write("\n")
