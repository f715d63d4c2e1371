"""Gradient-trained learners: a one-hidden-layer perceptron and softmax regression."""
import numpy as np

from .encoding import DenseEncoder

_BATCH = 8


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class MLP:
    """Sigmoid hidden layer, one sigmoid output per class, argmax decision.

    Trained with mini-batch backpropagation and momentum for a fixed
    number of epochs (no early stopping).
    """

    def __init__(self, X, y, n_classes, schema, params, rng):
        self.enc = DenseEncoder(X, schema)
        Z = self.enc.transform(X)
        n, d = Z.shape
        h = int(params["hidden_units"])
        lr = float(params["learning_rate"])
        mom = float(params["momentum"])
        T = np.zeros((n, n_classes))
        T[np.arange(n), y] = 1.0
        self.W1 = rng.uniform(-1, 1, (d, h)) / np.sqrt(max(d, 1))
        self.b1 = np.zeros(h)
        self.W2 = rng.uniform(-1, 1, (h, n_classes)) / np.sqrt(h)
        self.b2 = np.zeros(n_classes)
        vel = [np.zeros_like(p) for p in (self.W1, self.b1, self.W2, self.b2)]
        for _ in range(int(params["epochs"])):
            order = rng.permutation(n)
            for s in range(0, n, _BATCH):
                idx = order[s:s + _BATCH]
                zb, tb = Z[idx], T[idx]
                a1 = _sigmoid(zb @ self.W1 + self.b1)
                out = _sigmoid(a1 @ self.W2 + self.b2)
                d2 = (out - tb) / len(idx)
                d1 = (d2 @ self.W2.T) * a1 * (1 - a1)
                grads = (zb.T @ d1, d1.sum(axis=0), a1.T @ d2, d2.sum(axis=0))
                for p, v, g in zip((self.W1, self.b1, self.W2, self.b2), vel, grads):
                    v *= mom
                    v -= lr * g
                    p += v

    def predict(self, X):
        a1 = _sigmoid(self.enc.transform(X) @ self.W1 + self.b1)
        return np.argmax(a1 @ self.W2 + self.b2, axis=1).astype(np.int64)


class Logistic:
    """Multinomial logistic regression, full-batch gradient descent with L2."""

    def __init__(self, X, y, n_classes, schema, params, rng=None):
        self.enc = DenseEncoder(X, schema)
        Z = self.enc.transform(X)
        n, d = Z.shape
        T = np.zeros((n, n_classes))
        T[np.arange(n), y] = 1.0
        lam = float(params["l2"])
        lr = float(params["learning_rate"])
        self.W = np.zeros((d, n_classes))
        self.b = np.zeros(n_classes)
        for _ in range(int(params["epochs"])):
            logits = Z @ self.W + self.b
            logits -= logits.max(axis=1, keepdims=True)
            P = np.exp(logits)
            P /= P.sum(axis=1, keepdims=True)
            G = (P - T) / n
            self.W -= lr * (Z.T @ G + lam * self.W)
            self.b -= lr * G.sum(axis=0)

    def predict(self, X):
        return np.argmax(self.enc.transform(X) @ self.W + self.b, axis=1).astype(np.int64)
