"""Distance-based learners: k-nearest neighbours and locally weighted voting."""
import numpy as np

from .encoding import RangeScaler

_CHUNK = 256


def _vote(weights, labels, n_classes):
    # argmax picks the lowest class index on ties
    scores = np.zeros(n_classes)
    np.add.at(scores, labels, weights)
    return int(np.argmax(scores))


class _NeighbourModel:
    def __init__(self, X, y, n_classes, schema):
        self.X = X
        self.y = y
        self.n_classes = n_classes
        self.scaler = RangeScaler(X, schema)

    def _neighbourhoods(self, Q, k):
        """Yield (distances, indices) of the k nearest training rows per query.

        Equal distances keep training order (stable sort), which makes the
        lower training position win.
        """
        for start in range(0, len(Q), _CHUNK):
            D = self.scaler.distances(Q[start:start + _CHUNK], self.X)
            order = np.argsort(D, axis=1, kind="stable")[:, :k]
            for row, idx in zip(D, order):
                yield row[idx], idx


class KNN(_NeighbourModel):
    def __init__(self, X, y, n_classes, schema, params):
        super().__init__(X, y, n_classes, schema)
        self.k = min(int(params["k"]), len(y))
        self.inverse = params["weighting"] == "inverse-distance"

    def predict(self, Q):
        out = np.empty(len(Q), dtype=np.int64)
        for i, (d, idx) in enumerate(self._neighbourhoods(Q, self.k)):
            labels = self.y[idx]
            if self.inverse:
                zero = d == 0
                w = zero.astype(float) if zero.any() else 1.0 / d
            else:
                w = np.ones(len(idx))
            out[i] = _vote(w, labels, self.n_classes)
        return out


class LocallyWeighted(_NeighbourModel):
    """Kernel-weighted vote over a fixed-size neighbourhood.

    The linear kernel weights a neighbour by ``1 - d / (1.0001 * d_max)``
    where ``d_max`` is the largest distance in the neighbourhood; the
    inverse kernel uses ``1 / (d + 1e-6)``.
    """

    def __init__(self, X, y, n_classes, schema, params):
        super().__init__(X, y, n_classes, schema)
        self.k = min(int(params["neighborhood"]), len(y))
        self.kernel = params["kernel"]

    def predict(self, Q):
        out = np.empty(len(Q), dtype=np.int64)
        for i, (d, idx) in enumerate(self._neighbourhoods(Q, self.k)):
            if self.kernel == "linear":
                dmax = d.max()
                w = np.ones(len(d)) if dmax == 0 else 1.0 - d / (1.0001 * dmax)
            else:
                w = 1.0 / (d + 1e-6)
            out[i] = _vote(w, self.y[idx], self.n_classes)
        return out
