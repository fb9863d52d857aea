"""Stratified k-fold cross-validation, confusion matrices and metrics.

Within every fold the scaler is fitted on the training rows first, then the
training rows are re-sampled, then the model is fitted; the test rows are
only ever passed to ``predict``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import learn
from .featurize import CLASS_NAMES, N_CLASSES, ExampleSet
from .resample import ResampleStrategy, resample_indices


class TooFewPerClass(ValueError):
    pass


class EmptyMatrix(ValueError):
    pass


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """3x3 counts, row = predicted class, column = actual class."""

    counts: np.ndarray

    @classmethod
    def from_predictions(cls, actual, predicted) -> "ConfusionMatrix":
        counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        np.add.at(counts, (np.asarray(predicted), np.asarray(actual)), 1)
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    def tolist(self) -> list[list[int]]:
        return self.counts.tolist()


def _safe_div(num, den):
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return out


def metrics(cm: ConfusionMatrix) -> dict:
    c = cm.counts.astype(np.float64)
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix has no entries")
    col = c.sum(axis=0)
    row = c.sum(axis=1)
    diag = np.diag(c)
    return {
        "accuracy": float(diag.sum() / c.sum()),
        "per_class_recall": _safe_div(diag, col).tolist(),
        "per_class_precision": _safe_div(diag, row).tolist(),
        "column_normalized": _safe_div(c, col[None, :]).tolist(),
        "row_normalized": _safe_div(c, row[:, None]).tolist(),
    }


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def folds(self):
        for f in range(self.k):
            test = np.flatnonzero(self.assignments == f)
            train = np.flatnonzero(self.assignments != f)
            yield train, test


def stratified_kfold(y, k: int, seed: int) -> FoldPlan:
    """Shuffle each class and deal it round-robin over the folds.

    Each class starts dealing where the previous one stopped, so fold sizes
    also differ by at most one overall.
    """
    y = np.asarray(y)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    assignments = np.empty(y.size, dtype=np.int64)
    offset = 0
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if members.size < k:
            raise TooFewPerClass(f"class {CLASS_NAMES[int(c)]} has {members.size} examples, fewer than k={k}")
        members = rng.permutation(members)
        assignments[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    return FoldPlan(k, assignments, seed)


def grouped_kfold(groups, k: int, seed: int) -> FoldPlan:
    """Whole groups (links) per fold, assigned greedily to the lightest fold."""
    groups = np.asarray(groups)
    uniq, inverse, sizes = np.unique(groups, return_inverse=True, return_counts=True)
    if uniq.size < k:
        raise TooFewPerClass(f"{uniq.size} groups cannot fill k={k} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(uniq.size)
    order = order[np.argsort(-sizes[order], kind="stable")]
    load = np.zeros(k, dtype=np.int64)
    fold_of = np.empty(uniq.size, dtype=np.int64)
    for g in order:
        f = int(np.argmin(load))
        fold_of[g] = f
        load[f] += sizes[g]
    return FoldPlan(k, fold_of[inverse], seed)


def _mean_std(values):
    a = np.asarray(values, dtype=np.float64)
    a = a[~np.isnan(a)]
    if a.size == 0:
        return None, None
    return float(a.mean()), float(a.std(ddof=1)) if a.size > 1 else 0.0


@dataclass(eq=False)
class FoldResult:
    repeat: int
    fold: int
    n_train: int
    n_train_resampled: int
    n_test: int
    confusion: ConfusionMatrix

    def to_dict(self) -> dict:
        m = metrics(self.confusion)
        return {
            "repeat": self.repeat,
            "fold": self.fold,
            "n_train": self.n_train,
            "n_train_resampled": self.n_train_resampled,
            "n_test": self.n_test,
            "accuracy": m["accuracy"],
            "recall": _recall_or_none(self.confusion),
            "confusion": self.confusion.tolist(),
        }


def _recall_or_none(cm: ConfusionMatrix):
    col = cm.counts.sum(axis=0)
    return [float(cm.counts[c, c] / col[c]) if col[c] else None for c in range(N_CLASSES)]


@dataclass(eq=False)
class EvalReport:
    folds: list[FoldResult]
    config: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    @property
    def pooled(self) -> ConfusionMatrix:
        total = ConfusionMatrix(np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64))
        for f in self.folds:
            total = total + f.confusion
        return total

    @property
    def accuracies(self) -> list[float]:
        return [f.confusion.accuracy for f in self.folds]

    def recalls(self) -> np.ndarray:
        return np.array([[np.nan if r is None else r for r in _recall_or_none(f.confusion)] for f in self.folds])

    @property
    def accuracy_mean(self) -> float:
        return _mean_std(self.accuracies)[0]

    @property
    def accuracy_std(self) -> float:
        return _mean_std(self.accuracies)[1]

    def recall_mean(self, c: int):
        return _mean_std(self.recalls()[:, c])[0]

    def to_dict(self) -> dict:
        """Deterministic report content; timing is kept out on purpose."""
        rec = self.recalls()
        acc_mean, acc_std = _mean_std(self.accuracies)
        recall = {}
        for c, name in enumerate(CLASS_NAMES):
            mean, std = _mean_std(rec[:, c])
            recall[name] = {"mean": mean, "std": std}
        pooled = self.pooled
        return {
            "config": self.config,
            "classes": list(CLASS_NAMES),
            "confusion_orientation": "rows=predicted, columns=actual",
            "n_evaluations": len(self.folds),
            "accuracy": {"mean": acc_mean, "std": acc_std},
            "recall": recall,
            "pooled": {"confusion": pooled.tolist(), "total": pooled.total, **metrics(pooled)},
            "folds": [f.to_dict() for f in self.folds],
        }


def cross_validate(
    examples: ExampleSet,
    kind,
    hp=None,
    resample_strategy="none",
    k: int = 10,
    repeats: int = 10,
    seed: int = 0,
    *,
    group_by_link: bool = False,
    on_fold=None,
) -> EvalReport:
    """Repeated stratified k-fold evaluation of one pipeline configuration.

    ``on_fold(repeat, fold, train_idx, test_idx, resampled_idx, model)`` is
    called after each fold, with ``resampled_idx`` indexing into
    ``examples``; it exists so callers can audit the pipeline.
    """
    kind = learn.ModelKind.parse(kind)
    strategy = ResampleStrategy.parse(resample_strategy)
    hp = learn.hyperparams(kind, hp)
    X, y = examples.X, examples.y
    if len(y) == 0:
        raise ValueError("no examples to evaluate")
    started = time.perf_counter()
    folds = []
    for r in range(repeats):
        plan_seed = derive_seed(seed, r)
        if group_by_link:
            plan = grouped_kfold(examples.trace_index, k, plan_seed)
        else:
            plan = stratified_kfold(y, k, plan_seed)
        for f, (train, test) in enumerate(plan.folds()):
            scaler = learn.fit_scaler(X[train])
            local = resample_indices(y[train], strategy, derive_seed(seed, r, f, 1))
            rows = train[local]
            fold_hp = dict(hp, seed=derive_seed(seed, r, f, 2))
            model = learn.fit(kind, fold_hp, X[rows], y[rows], scaler=scaler)
            pred = model.predict(X[test])
            cm = ConfusionMatrix.from_predictions(y[test], pred)
            folds.append(FoldResult(r, f, train.size, rows.size, test.size, cm))
            if on_fold is not None:
                on_fold(r, f, train, test, rows, model)
    config = {
        "model": kind.value,
        "hyperparams": hp,
        "resample": strategy.value,
        "k": k,
        "repeats": repeats,
        "seed": seed,
        "group_by_link": group_by_link,
        "n_examples": int(len(y)),
        "class_counts": dict(zip(CLASS_NAMES, examples.class_counts().tolist())),
    }
    return EvalReport(folds, config, {"cross_validate_seconds": time.perf_counter() - started})
