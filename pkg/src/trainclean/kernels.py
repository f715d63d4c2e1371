"""Backend selection for the numerical kernels.

The compiled extension is used when it was built; otherwise (or when the
``TRAINCLEAN_KERNELS`` environment variable is set to ``python``) the numpy
fallback is used. Both backends give identical results.
"""
import os

import numpy as np

from . import _pykernels

_forced = os.environ.get("TRAINCLEAN_KERNELS", "").lower()

if _forced == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        _impl = _pykernels
        BACKEND = "python"


def mixed_distances(query, train, nominal, inv_range):
    """Distances between rows of `query` and rows of `train`.

    Numeric columns contribute ``(a - b) * inv_range``, nominal columns the
    overlap distance (0 or 1), and a missing cell on either side contributes
    1. Returns the Euclidean norm of the per-column contributions.
    """
    return _impl.mixed_distances(
        np.ascontiguousarray(query, dtype=np.float64),
        np.ascontiguousarray(train, dtype=np.float64),
        np.ascontiguousarray(nominal, dtype=np.uint8),
        np.ascontiguousarray(inv_range, dtype=np.float64),
    )


def split_costs(values, labels, n_classes, min_leaf, nlogn):
    """Unnormalised child entropy for each cut of a sorted numeric column.

    ``out[i]`` scores the cut between positions ``i`` and ``i + 1``; it is
    ``inf`` where the cut is illegal (equal neighbours or a side smaller
    than `min_leaf`). `nlogn` must tabulate ``k * log(k)`` for
    ``k = 0..len(values)``.
    """
    return _impl.split_costs(
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(labels, dtype=np.int64),
        int(n_classes),
        int(min_leaf),
        np.ascontiguousarray(nlogn, dtype=np.float64),
    )


def signed_rank_counts(ranks):
    """Number of sign assignments reaching each positive-rank sum.

    `ranks` are non-negative integers (callers double average ranks so
    that half ranks stay integral).
    """
    return _impl.signed_rank_counts(np.ascontiguousarray(ranks, dtype=np.int64))


def nlogn_table(n):
    k = np.arange(n + 1, dtype=np.float64)
    out = np.zeros(n + 1)
    out[1:] = k[1:] * np.log(k[1:])
    return out
