"""Multinomial logistic regression and one-vs-rest linear SVM."""
from __future__ import annotations

import numpy as np

from ..featurize import N_CLASSES


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _onehot(y, k=N_CLASSES):
    out = np.zeros((len(y), k))
    out[np.arange(len(y)), y] = 1.0
    return out


def logreg_loss_grad(W, b, X, y, l2_lambda):
    """Mean cross-entropy plus ``l2_lambda/2 * ||W||^2`` and its gradient."""
    n = X.shape[0]
    P = softmax(X @ W + b)
    loss = -np.mean(np.log(np.maximum(P[np.arange(n), y], 1e-300))) + 0.5 * l2_lambda * np.sum(W * W)
    D = (P - _onehot(y, W.shape[1])) / n
    return loss, X.T @ D + l2_lambda * W, D.sum(axis=0)


class LogisticRegression:
    kind = "logreg"

    def __init__(self, l2_lambda=1e-4, max_epochs=500, learning_rate=0.1, tol=1e-6, seed=0):
        self.l2_lambda = l2_lambda
        self.max_epochs = max_epochs
        self.learning_rate = learning_rate
        self.tol = tol
        self.seed = seed
        self.loss_history_: list[float] = []

    def fit(self, X, y):
        d = X.shape[1]
        W = np.zeros((d, N_CLASSES))
        b = np.zeros(N_CLASSES)
        self.loss_history_ = []
        for _ in range(self.max_epochs):
            loss, gW, gb = logreg_loss_grad(W, b, X, y, self.l2_lambda)
            self.loss_history_.append(float(loss))
            if np.sqrt(np.sum(gW * gW) + np.sum(gb * gb)) < self.tol:
                break
            W -= self.learning_rate * gW
            b -= self.learning_rate * gb
        self.W, self.b = W, b
        return self

    def predict_scores(self, X):
        return softmax(X @ self.W + self.b)

    def get_params(self):
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    def set_params(self, p):
        self.W = np.asarray(p["W"], dtype=np.float64)
        self.b = np.asarray(p["b"], dtype=np.float64)
        return self


class LinearSVM:
    """One-vs-rest hinge loss with L2 penalty, minibatch subgradient descent."""

    kind = "svm"

    def __init__(self, l2_lambda=1e-4, max_epochs=50, learning_rate=0.01, batch_size=256, seed=0):
        self.l2_lambda = l2_lambda
        self.max_epochs = max_epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, X, y):
        rng = np.random.default_rng(self.seed)
        n, d = X.shape
        W = np.zeros((d, N_CLASSES))
        b = np.zeros(N_CLASSES)
        T = 2.0 * _onehot(y) - 1.0
        for _ in range(self.max_epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                Xb, Tb = X[batch], T[batch]
                active = (Tb * (Xb @ W + b)) < 1.0
                G = -(Tb * active) / len(batch)
                W -= self.learning_rate * (Xb.T @ G + self.l2_lambda * W)
                b -= self.learning_rate * G.sum(axis=0)
        self.W, self.b = W, b
        return self

    def predict_scores(self, X):
        return X @ self.W + self.b

    def get_params(self):
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    def set_params(self, p):
        self.W = np.asarray(p["W"], dtype=np.float64)
        self.b = np.asarray(p["b"], dtype=np.float64)
        return self
