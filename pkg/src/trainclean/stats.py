"""Paired comparison statistics over per-dataset accuracies.

Accuracies are handled as percentages. Two accuracies are *equal* when
they differ by less than ``TIE_TOL`` so that float round-off in
cross-validated rationals never splits a genuine tie.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from . import kernels

TIE_TOL = 1e-9
EXACT_MAX_N = 25


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class PairedResults:
    """Per-dataset (baseline, treatment) accuracy pairs, in percent."""

    datasets: tuple[str, ...]
    baseline: tuple[float, ...]
    treatment: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.datasets) == len(self.baseline) == len(self.treatment)):
            raise StatsError("datasets, baseline and treatment must align")

    @classmethod
    def from_pairs(cls, pairs, names=None) -> "PairedResults":
        pairs = [(float(b), float(g)) for b, g in pairs]
        names = tuple(names) if names is not None else tuple(f"d{i}" for i in range(len(pairs)))
        return cls(names, tuple(b for b, _ in pairs), tuple(g for _, g in pairs))

    def __len__(self):
        return len(self.datasets)

    def differences(self) -> np.ndarray:
        return np.asarray(self.treatment) - np.asarray(self.baseline)


def _as_pairs(pairs) -> PairedResults:
    return pairs if isinstance(pairs, PairedResults) else PairedResults.from_pairs(pairs)


@dataclass(frozen=True)
class ReductionSummary:
    red_err: float | None
    red_acc: float | None
    counts: tuple[int, int, int]
    perfect_baseline: tuple[str, ...] = field(default=())

    def format_counts(self) -> str:
        return ",".join(str(c) for c in self.counts)

    def to_dict(self) -> dict:
        return {
            "red_err": self.red_err,
            "red_acc": self.red_acc,
            "counts": list(self.counts),
            "perfect_baseline": list(self.perfect_baseline),
        }


def reduction_metrics(pairs) -> ReductionSummary:
    """Average relative reduction in error and in accuracy, plus counts.

    A dataset with treatment >= baseline (ties included) contributes
    ``100 * (g - bl) / (100 - bl)`` to the error branch; one with
    treatment < baseline contributes ``100 * (g - bl) / bl`` to the
    accuracy branch. A branch with no datasets is ``None`` (reported as
    NA). A baseline of 100 contributes 0 and is listed in
    ``perfect_baseline``.
    """
    pairs = _as_pairs(pairs)
    err, acc, perfect = [], [], []
    greater = equal = less = 0
    for name, bl, g in zip(pairs.datasets, pairs.baseline, pairs.treatment):
        if not (0.0 <= bl <= 100.0 and 0.0 <= g <= 100.0):
            raise StatsError(f"{name}: accuracies must be percentages in [0, 100]")
        diff = g - bl
        if abs(diff) < TIE_TOL:
            equal += 1
            err.append(0.0)
            if 100.0 - bl < TIE_TOL:
                perfect.append(name)
        elif diff > 0:
            greater += 1
            err.append(100.0 * (diff / (100.0 - bl)))
        else:
            less += 1
            acc.append(100.0 * (diff / bl))
    return ReductionSummary(
        float(np.mean(err)) if err else None,
        float(np.mean(acc)) if acc else None,
        (greater, equal, less),
        tuple(perfect),
    )


@dataclass(frozen=True)
class WilcoxonVerdict:
    w_plus: float
    w_minus: float
    n_effective: int
    statistic: float
    p_value: float
    significant: bool
    direction: str
    method: str
    alpha: float

    def to_dict(self) -> dict:
        return {
            "w_plus": self.w_plus,
            "w_minus": self.w_minus,
            "n_effective": self.n_effective,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "significant": self.significant,
            "direction": self.direction,
            "method": self.method,
            "alpha": self.alpha,
        }


def average_ranks(values) -> np.ndarray:
    """1-based ranks with ties sharing the mean of their positions."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def signed_rank_sums(diffs):
    """Rank sums with zero differences split evenly between the two sides.

    Differences smaller than ``TIE_TOL`` in magnitude count as zero. With
    an odd number of zeros one of them is dropped first. Returns
    ``(w_plus, w_minus, ranks, signs)`` where ``signs`` is +1/-1/0 per
    retained difference.
    """
    d = np.asarray(diffs, dtype=float)
    d = np.where(np.abs(d) < TIE_TOL, 0.0, d)
    zeros = np.flatnonzero(d == 0)
    if len(zeros) % 2:
        d = np.delete(d, zeros[0])
    mags = np.abs(d)
    # ties in magnitude up to TIE_TOL share ranks
    mags = np.round(mags / TIE_TOL) * TIE_TOL if len(mags) else mags
    ranks = average_ranks(mags)
    signs = np.sign(d)
    w_plus = ranks[signs > 0].sum() + ranks[signs == 0].sum() / 2.0
    w_minus = ranks[signs < 0].sum() + ranks[signs == 0].sum() / 2.0
    return float(w_plus), float(w_minus), ranks, signs


def exact_lower_tail(ranks, t: float) -> float:
    """P(W+ <= t) when each rank's sign is an independent fair coin."""
    doubled = np.rint(2 * np.asarray(ranks)).astype(np.int64)
    counts = kernels.signed_rank_counts(doubled)
    k = int(math.floor(2 * t + 1e-9))
    if k < 0:
        return 0.0
    return float(counts[: k + 1].sum() / 2.0 ** len(doubled))


def wilcoxon(pairs, alpha: float = 0.05, method: str = "auto") -> WilcoxonVerdict:
    """Two-sided Wilcoxon signed-ranks test on treatment minus baseline.

    ``method="auto"`` uses the exact null distribution of the observed
    ranks (enumerated by dynamic programming) up to 25 effective pairs and
    the normal approximation above that; ``"exact"`` and ``"normal"``
    force a path.
    """
    pairs = _as_pairs(pairs)
    if len(pairs) < 5:
        raise StatsError("the Wilcoxon test needs at least 5 pairs")
    w_plus, w_minus, ranks, _ = signed_rank_sums(pairs.differences())
    n = len(ranks)
    t = min(w_plus, w_minus)
    if w_plus > w_minus + 1e-12:
        direction = "treatment"
    elif w_minus > w_plus + 1e-12:
        direction = "baseline"
    else:
        direction = "none"
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "normal"
    if n == 0 or direction == "none":
        return WilcoxonVerdict(w_plus, w_minus, n, t, 1.0, False, direction, method, alpha)
    if method == "exact":
        p = min(1.0, 2.0 * exact_lower_tail(ranks, t))
    elif method == "normal":
        mu = n * (n + 1) / 4.0
        sd = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0)
        z = (t - mu) / sd
        p = min(1.0, 2.0 * NormalDist().cdf(z))
    else:
        raise StatsError(f"unknown method {method!r}")
    return WilcoxonVerdict(w_plus, w_minus, n, t, p, p <= alpha, direction, method, alpha)


def format_column(label: str, mean_accuracy: float, summary: ReductionSummary,
                  verdict: WilcoxonVerdict | None) -> str:
    """Text block with one comparison column: accuracy, %red_err, %red_acc, count."""
    mark = "*" if verdict is not None and verdict.significant and verdict.direction == "treatment" else ""

    def na(v):
        return "NA" if v is None else f"{v:.2f}"

    return "\n".join([
        f"{label}",
        f"  accuracy   {mean_accuracy:.2f}{mark}",
        f"  %red_err   {na(summary.red_err)}",
        f"  %red_acc   {na(summary.red_acc)}",
        f"  count      {summary.format_counts()}",
    ])


def paired_from_rows(rows: Sequence[tuple[str, float, float]]) -> PairedResults:
    return PairedResults(tuple(r[0] for r in rows), tuple(float(r[1]) for r in rows),
                         tuple(float(r[2]) for r in rows))
