"""Filling of missing RSSI readings.

Three strategies are supported: leave gaps as they are, fill them with
Gaussian noise around the linear interpolation of the bounding valid
readings, or write 0 (the "no signal" reading) into every gap.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .trace_model import RSSI_MAX, LinkTrace

log = logging.getLogger(__name__)


class InterpolationStrategy(str, enum.Enum):
    NONE = "none"
    GAUSSIAN = "gaussian"
    ZERO = "zero"

    @classmethod
    def parse(cls, value) -> "InterpolationStrategy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown interpolation {value!r}; choose from {[s.value for s in cls]}"
            ) from None


# Counts entirely empty traces that fell back to zeros under GAUSSIAN.
empty_gaussian_fallbacks = 0


@dataclass(frozen=True, eq=False)
class PreparedTrace:
    """RSSI series after gap filling, plus the genuine-reception mask.

    ``rssi_series`` is float64 with NaN marking entries left absent (only
    under ``InterpolationStrategy.NONE``).
    """

    rssi_series: np.ndarray
    received_mask: np.ndarray

    def __post_init__(self):
        self.rssi_series.setflags(write=False)
        self.received_mask.setflags(write=False)

    def __len__(self) -> int:
        return len(self.rssi_series)

    def __eq__(self, other):
        if not isinstance(other, PreparedTrace):
            return NotImplemented
        return np.array_equal(self.rssi_series, other.rssi_series, equal_nan=True) and np.array_equal(
            self.received_mask, other.received_mask
        )


def _gaussian_fill(values: np.ndarray, mask: np.ndarray, rng: np.random.Generator, sigma=None) -> np.ndarray:
    valid_pos = np.flatnonzero(mask)
    out = values.copy()
    if valid_pos.size == 0:
        global empty_gaussian_fallbacks
        empty_gaussian_fallbacks += 1
        log.debug("empty trace under gaussian interpolation; filling with zeros")
        out[:] = 0.0
        return out
    valid = values[valid_pos]
    if sigma is None:
        sigma = float(np.std(valid, ddof=1)) if valid.size >= 2 else 0.0
    missing = np.flatnonzero(~mask)
    if missing.size == 0:
        return out
    # np.interp clamps to the end values, which is the leading/trailing rule.
    mean = np.interp(missing, valid_pos, valid)
    noise = rng.standard_normal(missing.size)
    out[missing] = np.rint(np.clip(mean + sigma * noise, 0, RSSI_MAX))
    return out


def interpolate(trace: LinkTrace, strategy, seed: int = 0, sigma: float | None = None) -> PreparedTrace:
    """Fill the gaps of ``trace``.

    Under GAUSSIAN each gap value is drawn around the linear interpolation of
    the nearest valid readings (the nearest one for leading and trailing
    gaps) with spread ``sigma``, by default the sample standard deviation of
    the trace's valid readings, then rounded and clamped to [0, 127].
    """
    strategy = InterpolationStrategy.parse(strategy)
    raw = trace.rssi
    mask = np.array([r is not None for r in raw], dtype=bool)
    values = np.array([np.nan if r is None else float(r) for r in raw], dtype=np.float64)
    if strategy is InterpolationStrategy.ZERO:
        values[~mask] = 0.0
    elif strategy is InterpolationStrategy.GAUSSIAN:
        values = _gaussian_fill(values, mask, np.random.default_rng(seed), sigma)
    return PreparedTrace(values, mask)


def trace_seed(seed: int, trace_index: int) -> int:
    """Per-trace seed so that filled values do not depend on processing order."""
    return int(np.random.SeedSequence([seed, trace_index]).generate_state(1, dtype=np.uint64)[0])
