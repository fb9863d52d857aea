from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StandardScaler:
    means: np.ndarray
    stds: np.ndarray

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.means) / self.stds

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, d) -> "StandardScaler":
        return cls(np.asarray(d["means"], dtype=np.float64), np.asarray(d["stds"], dtype=np.float64))


def fit_scaler(X) -> StandardScaler:
    """Column means and population standard deviations; zero spread maps to 1."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput("cannot fit a scaler on an empty matrix")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    # Constant columns: the subtraction already yields exact zeros.
    stds = np.where(stds > 0, stds, 1.0)
    return StandardScaler(means, stds)


def transform(s: StandardScaler, X) -> np.ndarray:
    return s.transform(X)
