"""Input transforms shared by several learners."""
import numpy as np

from .. import kernels


class Schema:
    """Column layout a model was trained against."""

    def __init__(self, nominal, n_categories):
        self.nominal = np.asarray(nominal, dtype=bool)
        self.n_categories = tuple(int(c) for c in n_categories)

    @classmethod
    def of(cls, dataset):
        return cls(dataset.nominal_mask,
                   [len(f.categories) if f.is_nominal else 0 for f in dataset.features])

    @property
    def width(self):
        return len(self.nominal)


class RangeScaler:
    """Per-column 1/range for numeric columns, learnt from training rows."""

    def __init__(self, X, schema):
        inv = np.zeros(schema.width)
        for j in np.flatnonzero(~schema.nominal):
            col = X[:, j]
            col = col[~np.isnan(col)]
            if len(col):
                span = col.max() - col.min()
                inv[j] = 1.0 / span if span > 0 else 0.0
        self.inv_range = inv
        self.nominal = schema.nominal

    def distances(self, query, train):
        return kernels.mixed_distances(query, train, self.nominal, self.inv_range)


class DenseEncoder:
    """Standardise numeric columns and one-hot nominal ones.

    Missing numeric cells become 0 (the training mean after
    standardisation); missing nominal cells get an all-zero block.
    """

    def __init__(self, X, schema):
        self.schema = schema
        self.mean = np.zeros(schema.width)
        self.scale = np.ones(schema.width)
        for j in np.flatnonzero(~schema.nominal):
            col = X[:, j]
            col = col[~np.isnan(col)]
            if len(col):
                self.mean[j] = np.sort(col).sum() / len(col)
                sd = np.sqrt(np.sort((col - self.mean[j]) ** 2).sum() / len(col))
                self.scale[j] = sd if sd > 0 else 1.0
        self.width = int(sum(c if nom else 1 for nom, c in zip(schema.nominal, schema.n_categories)))

    def transform(self, X):
        out = np.zeros((len(X), self.width))
        col = 0
        for j, nom in enumerate(self.schema.nominal):
            v = X[:, j]
            miss = np.isnan(v)
            if nom:
                k = self.schema.n_categories[j]
                rows = np.flatnonzero(~miss)
                out[rows, col + v[rows].astype(np.int64)] = 1.0
                col += k
            else:
                out[:, col] = np.where(miss, 0.0, (v - self.mean[j]) / self.scale[j])
                col += 1
        return out
