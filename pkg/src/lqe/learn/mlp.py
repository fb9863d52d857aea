"""One-hidden-layer ReLU network with a softmax output."""
from __future__ import annotations

import numpy as np

from ..featurize import N_CLASSES
from .linear import _onehot, softmax


def mlp_forward(params, X):
    W1, b1, W2, b2 = params
    H = X @ W1 + b1
    A = np.maximum(H, 0.0)
    return H, A, softmax(A @ W2 + b2)


def mlp_loss_grad(params, X, y):
    """Mean cross-entropy and gradients with respect to (W1, b1, W2, b2)."""
    W1, b1, W2, b2 = params
    n = X.shape[0]
    H, A, P = mlp_forward(params, X)
    loss = -np.mean(np.log(np.maximum(P[np.arange(n), y], 1e-300)))
    D2 = (P - _onehot(y, W2.shape[1])) / n
    gW2 = A.T @ D2
    gb2 = D2.sum(axis=0)
    D1 = (D2 @ W2.T) * (H > 0)
    gW1 = X.T @ D1
    gb1 = D1.sum(axis=0)
    return loss, (gW1, gb1, gW2, gb2)


def init_params(d, hidden, rng, k=N_CLASSES):
    # He initialisation for the ReLU layer.
    W1 = rng.standard_normal((d, hidden)) * np.sqrt(2.0 / d)
    W2 = rng.standard_normal((hidden, k)) * np.sqrt(1.0 / hidden)
    return [W1, np.zeros(hidden), W2, np.zeros(k)]


class MLP:
    kind = "mlp"

    def __init__(self, hidden_units=32, learning_rate=0.01, momentum=0.9, epochs=20, batch_size=256, seed=0):
        self.hidden_units = hidden_units
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, X, y):
        rng = np.random.default_rng(self.seed)
        n, d = X.shape
        params = init_params(d, self.hidden_units, rng)
        velocity = [np.zeros_like(p) for p in params]
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                _, grads = mlp_loss_grad(params, X[batch], y[batch])
                for p, v, g in zip(params, velocity, grads):
                    v *= self.momentum
                    v -= self.learning_rate * g
                    p += v
        self.params = params
        return self

    def predict_scores(self, X):
        return mlp_forward(self.params, X)[2]

    def get_params(self):
        return {"layers": [p.tolist() for p in self.params]}

    def set_params(self, p):
        self.params = [np.asarray(a, dtype=np.float64) for a in p["layers"]]
        return self
