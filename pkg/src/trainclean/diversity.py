"""Classifier output difference (COD) and learner clustering.

COD between two learners is the fraction of pooled (dataset, run,
instance) prediction points on which they disagree. Learners are clustered
agglomeratively on COD and one medoid per cluster forms a diverse
ensemble.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cv import EvalCache, Protocol, cv_predictions
from .learners import LearnerSpec

log = logging.getLogger(__name__)

LINKAGES = ("single", "complete", "average")


class DiversityError(ValueError):
    pass


def cod(predictions_a, predictions_b) -> float:
    """Fraction of index points where two prediction tables disagree.

    Accepts equal-shape arrays/sequences or mappings with identical keys.
    """
    if isinstance(predictions_a, Mapping) or isinstance(predictions_b, Mapping):
        if not (isinstance(predictions_a, Mapping) and isinstance(predictions_b, Mapping)):
            raise DiversityError("cannot compare a mapping with a sequence")
        if predictions_a.keys() != predictions_b.keys():
            raise DiversityError("prediction tables cover different index sets")
        keys = list(predictions_a)
        a = np.array([predictions_a[k] for k in keys])
        b = np.array([predictions_b[k] for k in keys])
    else:
        a, b = np.asarray(predictions_a), np.asarray(predictions_b)
        if a.shape != b.shape:
            raise DiversityError(f"prediction tables differ in shape: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise DiversityError("empty prediction tables")
    return float(np.count_nonzero(a != b) / a.size)


@dataclass
class CodMatrix:
    learners: tuple[LearnerSpec, ...]
    d: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.learners]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([""] + self.labels)
            for name, row in zip(self.labels, self.d):
                w.writerow([name] + [repr(float(v)) for v in row])


def cod_matrix(learners: Sequence[LearnerSpec], corpus: Sequence, protocol: Protocol = Protocol(),
               cache: EvalCache | None = None) -> CodMatrix:
    """Pairwise COD over CV predictions pooled across `corpus`.

    A learner that fails on a dataset drops that dataset from every pair it
    takes part in; the exclusions are listed in ``provenance``.
    """
    learners = tuple(learners)
    if len(learners) < 2:
        raise DiversityError("need at least two learners")
    if not corpus:
        raise DiversityError("corpus must not be empty")
    preds: list[list[np.ndarray | None]] = []
    failures = []
    for i, spec in enumerate(learners):
        row = []
        for k, ds in enumerate(corpus):
            try:
                row.append(cv_predictions(spec, ds, protocol, cache=cache))
            except Exception as exc:
                log.warning("%s failed on %s: %s", spec.label, ds.name or k, exc)
                failures.append({"learner": i, "dataset": k, "error": str(exc)})
                row.append(None)
        preds.append(row)
    m = len(learners)
    d = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            diff = total = 0
            for k in range(len(corpus)):
                a, b = preds[i][k], preds[j][k]
                if a is None or b is None:
                    continue
                diff += int(np.count_nonzero(a != b))
                total += a.size
            d[i, j] = d[j, i] = diff / total if total else 1.0
    prov = {
        "datasets": [ds.name for ds in corpus],
        "protocol": protocol.to_dict(),
        "excluded": failures,
    }
    return CodMatrix(learners, d, prov)


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """Merges in nondecreasing height; node ``n + i`` is created by merge ``i``."""

    n_leaves: int
    merges: list[Merge]

    def to_dict(self, labels=None) -> dict:
        return {
            "leaves": list(labels) if labels is not None else list(range(self.n_leaves)),
            "merges": [{"left": m.left, "right": m.right, "height": m.height, "size": m.size}
                       for m in self.merges],
        }

    def clusters(self, height: float) -> list[list[int]]:
        """Connected leaf groups after discarding merges higher than `height`."""
        members = {i: [i] for i in range(self.n_leaves)}
        for k, m in enumerate(self.merges):
            members[self.n_leaves + k] = members[m.left] + members[m.right]
        root = list(range(self.n_leaves))

        def find(i):
            while root[i] != i:
                root[i] = root[root[i]]
                i = root[i]
            return i

        for k, m in enumerate(self.merges):
            if m.height <= height:
                leaves = members[self.n_leaves + k]
                for leaf in leaves[1:]:
                    root[find(leaf)] = find(leaves[0])
        groups: dict[int, list[int]] = {}
        for i in range(self.n_leaves):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values(), key=lambda c: c[0])


def agglomerate(matrix, linkage: str = "average") -> Dendrogram:
    """Hierarchical agglomerative clustering on a distance matrix.

    Active clusters are ordered by their smallest leaf; among equally close
    pairs the first pair in that order is merged. Average linkage is the
    unweighted mean over cross-cluster leaf pairs.
    """
    if linkage not in LINKAGES:
        raise DiversityError(f"unknown linkage {linkage!r}")
    D = np.asarray(getattr(matrix, "d", matrix), dtype=float)
    n = len(D)
    if n < 2:
        raise DiversityError("need at least two learners")
    # node id -> member leaves
    active = {i: [i] for i in range(n)}
    merges = []
    for step in range(n - 1):
        order = sorted(active, key=lambda c: min(active[c]))
        best = None
        for a_pos, a in enumerate(order):
            for b in order[a_pos + 1:]:
                block = D[np.ix_(active[a], active[b])]
                if linkage == "single":
                    h = block.min()
                elif linkage == "complete":
                    h = block.max()
                else:
                    h = block.sum() / block.size
                if best is None or h < best[0] - 1e-12:
                    best = (float(h), a, b)
        h, a, b = best
        node = n + step
        active[node] = active.pop(a) + active.pop(b)
        merges.append(Merge(a, b, h, len(active[node])))
    return Dendrogram(n, merges)


def cut_and_select(dendrogram: Dendrogram, height: float = 0.18,
                   matrix: CodMatrix | None = None) -> list[LearnerSpec]:
    """One medoid learner per cluster at the cut `height`.

    The medoid minimises summed COD to its cluster mates; ties go to the
    earlier learner. Returns specs in order of each cluster's first member.
    """
    if height < 0:
        raise DiversityError("cut height must be non-negative")
    if matrix is None:
        raise DiversityError("cut_and_select needs the COD matrix for medoids")
    out = []
    for members in dendrogram.clusters(height):
        sums = [matrix.d[i, members].sum() for i in members]
        out.append(matrix.learners[members[int(np.argmin(sums))]])
    return out


def write_selection(specs: Sequence[LearnerSpec], path) -> None:
    with open(path, "w") as fh:
        json.dump([s.to_dict() for s in specs], fh, indent=2)
        fh.write("\n")
