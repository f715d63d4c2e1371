"""Naive Bayes with Gaussian or 10-bin histogram numeric likelihoods.

Missing cells are skipped in the likelihood product. Sufficient statistics
are summed over sorted values so the model does not depend on row order.
"""
import numpy as np

_MIN_VAR = 1e-9
_BINS = 10


def _ssum(a):
    return float(np.sort(a).sum())


class NaiveBayes:
    def __init__(self, X, y, n_classes, schema, params):
        self.schema = schema
        self.n_classes = n_classes
        self.gaussian = params["numeric_model"] == "gaussian"
        alpha = float(params["laplace"])
        counts = np.bincount(y, minlength=n_classes).astype(float)
        self.log_prior = np.log((counts + alpha) / (counts.sum() + alpha * n_classes))
        self.tables = []
        for j in range(schema.width):
            col = X[:, j]
            known = ~np.isnan(col)
            if schema.nominal[j]:
                k = schema.n_categories[j]
                freq = np.zeros((n_classes, k))
                np.add.at(freq, (y[known], col[known].astype(np.int64)), 1.0)
                freq = (freq + alpha) / (freq.sum(axis=1, keepdims=True) + alpha * k)
                self.tables.append(("nominal", np.log(freq)))
            elif self.gaussian:
                vals = col[known]
                pooled = np.var(np.sort(vals)) if len(vals) > 1 else 0.0
                floor = max(_MIN_VAR, 1e-6 * pooled)
                mean = np.zeros(n_classes)
                var = np.full(n_classes, max(pooled, floor) if pooled > 0 else 1.0)
                for c in range(n_classes):
                    v = col[known & (y == c)]
                    if len(v):
                        mean[c] = _ssum(v) / len(v)
                        if len(v) > 1:
                            var[c] = max(_ssum((v - mean[c]) ** 2) / len(v), floor)
                    elif len(vals):
                        mean[c] = _ssum(vals) / len(vals)
                self.tables.append(("gaussian", (mean, var)))
            else:
                vals = col[known]
                lo, hi = (vals.min(), vals.max()) if len(vals) else (0.0, 1.0)
                edges = np.linspace(lo, hi, _BINS + 1)
                freq = np.zeros((n_classes, _BINS))
                if len(vals):
                    np.add.at(freq, (y[known], self._bin(edges, vals)), 1.0)
                width = (hi - lo) / _BINS if hi > lo else 1.0
                dens = (freq + alpha) / (freq.sum(axis=1, keepdims=True) + alpha * _BINS) / width
                self.tables.append(("histogram", (edges, np.log(dens))))

    @staticmethod
    def _bin(edges, v):
        return np.clip(np.searchsorted(edges, v, side="right") - 1, 0, _BINS - 1)

    def log_posterior(self, Q):
        out = np.tile(self.log_prior, (len(Q), 1))
        for j, (kind, table) in enumerate(self.tables):
            v = Q[:, j]
            rows = np.flatnonzero(~np.isnan(v))
            if not len(rows):
                continue
            if kind == "nominal":
                out[rows] += table[:, v[rows].astype(np.int64)].T
            elif kind == "gaussian":
                mean, var = table
                diff = v[rows, None] - mean[None, :]
                out[rows] += -0.5 * np.log(2 * np.pi * var)[None, :] - diff ** 2 / (2 * var)[None, :]
            else:
                edges, logd = table
                out[rows] += logd[:, self._bin(edges, v[rows])].T
        return out

    def predict(self, Q):
        return np.argmax(self.log_posterior(Q), axis=1).astype(np.int64)
