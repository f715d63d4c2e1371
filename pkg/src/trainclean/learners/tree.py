"""Information-gain decision trees with pessimistic pruning, and random forests.

Numeric features get binary threshold splits, nominal features one branch
per category. Rows with a missing split value follow the branch that
received the most training rows; ties go to the lowest branch index.
"""
from __future__ import annotations

from statistics import NormalDist

import numpy as np

from .. import kernels
from ..seeding import derive_rng
from .space import UNLIMITED

_EPS = 1e-12


class Node:
    __slots__ = ("counts", "label", "feature", "threshold", "children", "default_child")

    def __init__(self, counts):
        self.counts = counts
        self.label = int(np.argmax(counts))
        self.feature = None
        self.threshold = None
        self.children = None
        self.default_child = 0

    @property
    def is_leaf(self):
        return self.children is None

    def branch(self, v):
        """Child index for split values `v` (array)."""
        if self.threshold is not None:
            idx = np.where(v <= self.threshold, 0, 1)
        else:
            idx = np.nan_to_num(v, nan=0).astype(np.int64)
        return np.where(np.isnan(v), self.default_child, idx)


def pessimistic_errors(n: float, errors: float, confidence: float) -> float:
    """Upper confidence bound on the error count of a leaf (C4.5 style)."""
    if n <= 0:
        return 0.0
    z = NormalDist().inv_cdf(1.0 - confidence)
    f = errors / n
    num = f + z * z / (2 * n) + z * np.sqrt(max(f / n - f * f / n + z * z / (4 * n * n), 0.0))
    return float(n * num / (1 + z * z / n))


class TreeBuilder:
    def __init__(self, n_classes, schema, min_leaf=2, max_depth=None, max_features=None,
                 rng=None):
        self.n_classes = n_classes
        self.schema = schema
        self.min_leaf = max(1, int(min_leaf))
        self.max_depth = max_depth
        self.max_features = max_features
        self.rng = rng

    def build(self, X, y):
        self.X, self.y = X, y
        self.nlogn = kernels.nlogn_table(len(y))
        root = self._grow(np.arange(len(y)), 0)
        del self.X, self.y
        return root

    def _counts(self, rows):
        return np.bincount(self.y[rows], minlength=self.n_classes)

    def _term(self, counts):
        # n * entropy(counts), in nats
        return self.nlogn[counts.sum()] - self.nlogn[counts].sum()

    def _candidate_features(self):
        d = self.schema.width
        if self.max_features is None or self.max_features >= d:
            return range(d)
        return np.sort(self.rng.choice(d, self.max_features, replace=False))

    def _grow(self, rows, depth):
        counts = self._counts(rows)
        node = Node(counts)
        n = len(rows)
        if (n < 2 * self.min_leaf or np.count_nonzero(counts) <= 1
                or (self.max_depth is not None and depth >= self.max_depth)):
            return node
        best_gain, best = _EPS, None
        for j in self._candidate_features():
            found = self._best_split(rows, int(j), n)
            if found is not None and found[0] > best_gain + _EPS:
                best_gain, best = found[0], (int(j), found[1])
        if best is None:
            return node
        j, threshold = best
        v = self.X[rows, j]
        node.feature = j
        node.threshold = threshold
        n_branches = 2 if threshold is not None else self.schema.n_categories[j]
        known = ~np.isnan(v)
        if threshold is not None:
            idx = np.where(v <= threshold, 0, 1)
        else:
            idx = np.nan_to_num(v, nan=0).astype(np.int64)
        sizes = np.bincount(idx[known], minlength=n_branches)
        node.default_child = int(np.argmax(sizes))
        idx = np.where(known, idx, node.default_child)
        node.children = []
        for b in range(n_branches):
            sub = rows[idx == b]
            if len(sub):
                node.children.append(self._grow(sub, depth + 1))
            else:
                leaf = Node(np.zeros(self.n_classes, dtype=np.int64))
                leaf.label = node.label
                node.children.append(leaf)
        return node

    def _best_split(self, rows, j, n):
        v = self.X[rows, j]
        known = ~np.isnan(v)
        kr = rows[known]
        if len(kr) < 2 * self.min_leaf:
            return None
        vals = v[known]
        labels = self.y[kr]
        parent = self._term(np.bincount(labels, minlength=self.n_classes))
        if self.schema.nominal[j]:
            k = self.schema.n_categories[j]
            table = np.zeros((k, self.n_classes), dtype=np.int64)
            np.add.at(table, (vals.astype(np.int64), labels), 1)
            sizes = table.sum(axis=1)
            if np.count_nonzero(sizes >= self.min_leaf) < 2:
                return None
            cost = sum(self._term(table[c]) for c in range(k) if sizes[c])
            return (parent - cost) / n, None
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        costs = kernels.split_costs(sv, labels[order], self.n_classes, self.min_leaf, self.nlogn)
        if not len(costs):
            return None
        i = int(np.argmin(costs))
        if not np.isfinite(costs[i]):
            return None
        return (parent - costs[i]) / n, float((sv[i] + sv[i + 1]) / 2.0)


def prune(node: Node, confidence: float) -> float:
    """Collapse subtrees whose pessimistic error is no better than a leaf's.

    Returns the pessimistic error estimate of the (possibly pruned) node.
    """
    n = node.counts.sum()
    leaf_err = pessimistic_errors(n, n - node.counts.max() if n else 0, confidence)
    if node.is_leaf:
        return leaf_err
    sub_err = sum(prune(c, confidence) for c in node.children)
    if leaf_err <= sub_err + 0.1:
        node.children = None
        node.feature = None
        node.threshold = None
        return leaf_err
    return sub_err


def predict_tree(node: Node, X) -> np.ndarray:
    out = np.empty(len(X), dtype=np.int64)
    stack = [(node, np.arange(len(X)))]
    while stack:
        nd, rows = stack.pop()
        if not len(rows):
            continue
        if nd.is_leaf:
            out[rows] = nd.label
            continue
        b = nd.branch(X[rows, nd.feature])
        for ci, child in enumerate(nd.children):
            stack.append((child, rows[b == ci]))
    return out


def tree_size(node: Node) -> int:
    if node.is_leaf:
        return 1
    return 1 + sum(tree_size(c) for c in node.children)


class DecisionTree:
    def __init__(self, X, y, n_classes, schema, params, rng=None):
        builder = TreeBuilder(n_classes, schema, min_leaf=params["min_leaf"])
        self.root = builder.build(X, y)
        if params["pruning"] == "on":
            prune(self.root, float(params["confidence"]))

    def predict(self, X):
        return predict_tree(self.root, X)


def _features_per_split(rule, d):
    if rule == "all":
        return None
    if rule == "sqrt":
        return max(1, int(np.sqrt(d)))
    return max(1, int(np.log2(d))) if d > 1 else 1


class RandomForest:
    """Bagged unpruned trees (``min_leaf = 1``) with random feature subsets."""

    def __init__(self, X, y, n_classes, schema, params, seed=0):
        self.n_classes = n_classes
        depth = params["max_depth"]
        depth = None if depth == UNLIMITED else int(depth)
        m = _features_per_split(params["features_per_split"], schema.width)
        n = len(y)
        self.trees = []
        for t in range(int(params["trees"])):
            rng = derive_rng(seed, "tree", t)
            rows = rng.integers(0, n, n) if params["bootstrap"] else np.arange(n)
            builder = TreeBuilder(n_classes, schema, min_leaf=1, max_depth=depth,
                                  max_features=m, rng=rng)
            self.trees.append(builder.build(X[rows], y[rows]))

    def predict(self, X):
        votes = np.zeros((len(X), self.n_classes), dtype=np.int64)
        rows = np.arange(len(X))
        for tree in self.trees:
            votes[rows, predict_tree(tree, X)] += 1
        return np.argmax(votes, axis=1).astype(np.int64)
