"""Pure numpy implementations of the hot loops (fallback for ``_ckernels``).

Results must match the compiled versions bit for bit, so accumulation
order mirrors the loops in the ``.pyx`` file.
"""
import numpy as np


def mixed_distances(query, train, nominal, inv_range):
    nq, d = query.shape
    nt = train.shape[0]
    acc = np.zeros((nq, nt), dtype=np.float64)
    with np.errstate(invalid="ignore"):
        for f in range(d):
            a = query[:, f][:, None]
            b = train[None, :, f]
            if nominal[f]:
                c = np.where(a == b, 0.0, 1.0)
            else:
                c = (a - b) * inv_range[f]
            c = np.where(np.isnan(a) | np.isnan(b), 1.0, c)
            acc = acc + c * c
    return np.sqrt(acc)


def split_costs(values, labels, n_classes, min_leaf, nlogn):
    n = values.shape[0]
    out = np.full(max(n - 1, 0), np.inf)
    if n < 2:
        return out
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), labels] = 1
    left = np.cumsum(onehot, axis=0)[:-1]
    right = left[-1] + onehot[-1] - left
    nl = np.arange(1, n)
    nr = n - nl
    sl = np.zeros(n - 1)
    sr = np.zeros(n - 1)
    for c in range(n_classes):
        sl = sl + nlogn[left[:, c]]
    for c in range(n_classes):
        sr = sr + nlogn[right[:, c]]
    cost = (nlogn[nl] - sl) + (nlogn[nr] - sr)
    ok = (values[:-1] != values[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
    out[ok] = cost[ok]
    return out


def signed_rank_counts(ranks):
    ranks = np.asarray(ranks, dtype=np.int64)
    cnt = np.zeros(int(ranks.sum()) + 1, dtype=np.int64)
    cnt[0] = 1
    reach = 0
    for r in ranks:
        r = int(r)
        reach += r
        # shifted add; the slice copy keeps this a 0/1-knapsack update
        cnt[r:reach + 1] += cnt[: reach + 1 - r].copy()
    return cnt
