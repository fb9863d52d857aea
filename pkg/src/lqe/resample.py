"""Random over- and under-sampling of training examples."""
from __future__ import annotations

import enum
import logging

import numpy as np

from .featurize import ExampleSet

log = logging.getLogger(__name__)


class EmptyInput(ValueError):
    pass


class ResampleStrategy(str, enum.Enum):
    NONE = "none"
    ROS = "ros"
    RUS = "rus"

    @classmethod
    def parse(cls, value) -> "ResampleStrategy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown resample strategy {value!r}; choose from {[s.value for s in cls]}") from None


def _members(y):
    y = np.asarray(y)
    if y.size == 0:
        raise EmptyInput("cannot resample an empty example set")
    classes = np.unique(y)
    return [np.flatnonzero(y == c) for c in classes]


def oversample_indices(y, rng: np.random.Generator) -> np.ndarray:
    """All input indices followed by duplicates drawn with replacement per class.

    Classes are topped up to the majority count in ascending class order.
    """
    groups = _members(y)
    target = max(g.size for g in groups)
    extra = [g[rng.integers(0, g.size, target - g.size)] for g in groups]
    return np.concatenate([np.arange(len(y))] + extra)


def undersample_indices(y, rng: np.random.Generator) -> np.ndarray:
    """Per-class subsets of the minority count, returned in input order."""
    groups = _members(y)
    target = min(g.size for g in groups)
    keep = [np.sort(rng.choice(g, size=target, replace=False)) if g.size > target else g for g in groups]
    return np.sort(np.concatenate(keep))


def resample_indices(y, strategy, seed) -> np.ndarray:
    strategy = ResampleStrategy.parse(strategy)
    if strategy is ResampleStrategy.NONE:
        return np.arange(len(y))
    present = np.unique(y).size
    if present < 3:
        log.warning("re-sampling with only %d classes present; absent classes stay absent", present)
    rng = np.random.default_rng(seed)
    if strategy is ResampleStrategy.ROS:
        return oversample_indices(y, rng)
    return undersample_indices(y, rng)


def random_oversample(examples: ExampleSet, seed) -> ExampleSet:
    return examples.take(resample_indices(examples.y, ResampleStrategy.ROS, seed))


def random_undersample(examples: ExampleSet, seed) -> ExampleSet:
    return examples.take(resample_indices(examples.y, ResampleStrategy.RUS, seed))


def resample(examples: ExampleSet, strategy, seed) -> ExampleSet:
    return examples.take(resample_indices(examples.y, strategy, seed))
