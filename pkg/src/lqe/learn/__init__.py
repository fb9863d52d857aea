"""Feature scaling, the six classifiers and model persistence."""
from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..featurize import CLASSES, N_CLASSES
from .forest import RandomForest
from .linear import LinearSVM, LogisticRegression
from .majority import Majority
from .mlp import MLP
from .scaler import EmptyInput, StandardScaler, fit_scaler, transform
from .tree import DecisionTree

MODEL_FORMAT = "lqe-model"
MODEL_VERSION = 1


class ModelKind(str, enum.Enum):
    MAJORITY = "majority"
    LOGREG = "logreg"
    SVM = "svm"
    DTREE = "dtree"
    RFOREST = "rforest"
    MLP = "mlp"

    @classmethod
    def parse(cls, value) -> "ModelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown model {value!r}; choose from {[k.value for k in cls]}") from None


_ESTIMATORS = {
    ModelKind.MAJORITY: Majority,
    ModelKind.LOGREG: LogisticRegression,
    ModelKind.SVM: LinearSVM,
    ModelKind.DTREE: DecisionTree,
    ModelKind.RFOREST: RandomForest,
    ModelKind.MLP: MLP,
}

DEFAULT_HYPERPARAMS = {
    ModelKind.MAJORITY: {},
    ModelKind.LOGREG: {"l2_lambda": 1e-4, "max_epochs": 500, "learning_rate": 0.1, "tol": 1e-6},
    ModelKind.SVM: {"l2_lambda": 1e-4, "max_epochs": 50, "learning_rate": 0.01, "batch_size": 256},
    ModelKind.DTREE: {
        "min_samples_leaf": 5,
        "max_depth_cap": 32,
        "ccp_alpha_grid": [0.0, 1e-5, 1e-4, 1e-3, 1e-2],
        "selection_metric": "accuracy",
    },
    ModelKind.RFOREST: {
        "n_trees": 100,
        "features_per_split": None,
        "bootstrap": True,
        "min_samples_leaf": 5,
        "max_depth_cap": 32,
    },
    ModelKind.MLP: {"hidden_units": 32, "learning_rate": 0.01, "momentum": 0.9, "epochs": 20, "batch_size": 256},
}

_COUNTS = {"max_epochs", "batch_size", "min_samples_leaf", "max_depth_cap", "n_trees", "hidden_units", "epochs"}
_RATES = {"learning_rate"}
_LAMBDAS = {"l2_lambda", "tol"}


class SingleClassInput(UserWarning):
    pass


class NonFiniteFeature(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def hyperparams(kind, overrides=None, seed=0) -> dict:
    """Defaults for ``kind`` merged with ``overrides``, validated."""
    kind = ModelKind.parse(kind)
    hp = dict(DEFAULT_HYPERPARAMS[kind])
    for key, value in (overrides or {}).items():
        if key == "seed":
            seed = int(value)
            continue
        if key not in hp:
            raise ValueError(f"unknown hyperparameter {key!r} for {kind.value}")
        hp[key] = value
    for key, value in hp.items():
        if key in _COUNTS and (int(value) != value or value < 1):
            raise ValueError(f"{key} must be an integer >= 1, got {value!r}")
        if key in _RATES and not value > 0:
            raise ValueError(f"{key} must be > 0")
        if key in _LAMBDAS and value < 0:
            raise ValueError(f"{key} must be >= 0")
        if key == "features_per_split" and value is not None and value < 1:
            raise ValueError("features_per_split must be >= 1")
        if key == "ccp_alpha_grid" and (not value or min(value) < 0):
            raise ValueError("ccp_alpha_grid must be a non-empty list of alphas >= 0")
    hp["seed"] = int(seed)
    return hp


def _make(kind: ModelKind, hp: dict):
    hp = dict(hp)
    if "ccp_alpha_grid" in hp:
        hp["ccp_alpha_grid"] = tuple(hp["ccp_alpha_grid"])
    return _ESTIMATORS[kind](**hp)


@dataclass(eq=False)
class TrainedModel:
    kind: ModelKind
    hyperparams: dict
    scaler: StandardScaler
    estimator: object
    classes_seen: tuple[int, ...] = field(default_factory=tuple)

    @property
    def n_features(self) -> int:
        return len(self.scaler.means)

    def predict_scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got shape {X.shape}")
        return self.estimator.predict_scores(self.scaler.transform(X))

    def predict(self, X) -> np.ndarray:
        # np.argmax returns the first maximum, i.e. the lowest class on ties.
        return np.argmax(self.predict_scores(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind.value,
            "hyperparams": self.hyperparams,
            "scaler": self.scaler.to_dict(),
            "estimator": {"type": self.estimator.kind, "params": self.estimator.get_params()},
            "classes_seen": list(self.classes_seen),
        }

    @classmethod
    def from_dict(cls, d) -> "TrainedModel":
        if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
            raise ValueError("not a supported lqe model document")
        kind = ModelKind.parse(d["kind"])
        est_kind = ModelKind.parse(d["estimator"]["type"])
        est = _ESTIMATORS[est_kind]() if est_kind is not kind else _make(kind, d["hyperparams"])
        est.set_params(d["estimator"]["params"])
        return cls(kind, d["hyperparams"], StandardScaler.from_dict(d["scaler"]), est, tuple(d["classes_seen"]))


def fit(kind, hp, X, y, scaler: StandardScaler | None = None) -> TrainedModel:
    """Fit a classifier on raw features ``X``.

    ``scaler`` lets the caller supply a scaler fitted on different rows
    (cross-validation fits it before re-sampling); otherwise it is fitted on
    ``X``.
    """
    kind = ModelKind.parse(kind)
    hp = hyperparams(kind, hp)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise EmptyInput(f"need matching non-empty X and y, got {X.shape} and {y.shape}")
    if not np.isfinite(X).all():
        raise NonFiniteFeature("features contain NaN or infinity")
    if y.min() < 0 or y.max() >= N_CLASSES:
        raise ValueError("labels must be class indices 0..2")
    scaler = scaler or fit_scaler(X)
    Z = scaler.transform(X)
    classes_seen = tuple(int(c) for c in np.unique(y))
    if len(classes_seen) == 1 and kind is not ModelKind.MAJORITY:
        warnings.warn(
            f"only class {CLASSES[classes_seen[0]].label} in training data; {kind.value} falls back to majority",
            SingleClassInput,
            stacklevel=2,
        )
        est = Majority().fit(Z, y)
    else:
        est = _make(kind, hp).fit(Z, y)
    return TrainedModel(kind, hp, scaler, est, classes_seen)


def predict(m: TrainedModel, X) -> np.ndarray:
    return m.predict(X)


def predict_scores(m: TrainedModel, X) -> np.ndarray:
    return m.predict_scores(X)


def save_model(m: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(m.to_dict(), fh)


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return TrainedModel.from_dict(json.load(fh))


__all__ = [
    "DEFAULT_HYPERPARAMS",
    "DimensionMismatch",
    "EmptyInput",
    "ModelKind",
    "NonFiniteFeature",
    "SingleClassInput",
    "StandardScaler",
    "TrainedModel",
    "fit",
    "fit_scaler",
    "hyperparams",
    "load_model",
    "predict",
    "predict_scores",
    "save_model",
    "transform",
]
