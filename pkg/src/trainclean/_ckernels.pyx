# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the numerical hot loops.

Every function here has a numpy twin in ``_pykernels`` and must return
bit-identical results; additions happen in the same order in both.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, isnan, INFINITY

cnp.import_array()


def mixed_distances(const double[:, ::1] query, const double[:, ::1] train,
                    const unsigned char[::1] nominal, const double[::1] inv_range):
    cdef Py_ssize_t nq = query.shape[0], nt = train.shape[0], d = query.shape[1]
    cdef Py_ssize_t i, j, f
    cdef double a, b, c, s
    out = np.empty((nq, nt), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(nq):
        for j in range(nt):
            s = 0.0
            for f in range(d):
                a = query[i, f]
                b = train[j, f]
                if isnan(a) or isnan(b):
                    c = 1.0
                elif nominal[f]:
                    c = 0.0 if a == b else 1.0
                else:
                    c = (a - b) * inv_range[f]
                s = s + c * c
            o[i, j] = sqrt(s)
    return out


def split_costs(const double[::1] values, const long long[::1] labels,
                Py_ssize_t n_classes, Py_ssize_t min_leaf, const double[::1] nlogn):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i, c, nl, nr
    cdef double sl, sr
    out = np.full(max(n - 1, 0), np.inf, dtype=np.float64)
    if n < 2:
        return out
    cdef double[::1] o = out
    cdef long long[::1] total = np.zeros(n_classes, dtype=np.int64)
    cdef long long[::1] left = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        total[labels[i]] += 1
    for i in range(n - 1):
        left[labels[i]] += 1
        nl = i + 1
        nr = n - nl
        if values[i] == values[i + 1] or nl < min_leaf or nr < min_leaf:
            continue
        sl = 0.0
        for c in range(n_classes):
            sl = sl + nlogn[left[c]]
        sr = 0.0
        for c in range(n_classes):
            sr = sr + nlogn[total[c] - left[c]]
        o[i] = (nlogn[nl] - sl) + (nlogn[nr] - sr)
    return out


def signed_rank_counts(const long long[::1] ranks):
    cdef Py_ssize_t n = ranks.shape[0], k, s, r
    cdef long long top = 0
    for k in range(n):
        top += ranks[k]
    out = np.zeros(top + 1, dtype=np.int64)
    cdef long long[::1] cnt = out
    cdef long long reach = 0
    cnt[0] = 1
    for k in range(n):
        r = ranks[k]
        reach += r
        s = reach
        while s >= r:
            cnt[s] += cnt[s - r]
            s -= 1
    return out
