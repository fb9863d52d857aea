"""Sliding-window features and PRR class labels.

For every position ``i`` of a trace the features are computed from the
``w_history`` packets ending at ``i`` and the label from the packet
reception ratio of the ``w_prr`` packets that follow.
"""
from __future__ import annotations

import enum
import re
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .preprocess import PreparedTrace

WINDOW_MIN = 2
WINDOW_MAX = 100
WINDOW_GRID = (2, 5, 10, 15, 20, 30, 50, 80, 100)
POWERS = (-4, -3, -2, -1, 2, 3, 4)

BAD_MAX = 0.1
GOOD_MIN = 0.9


class LinkClass(enum.IntEnum):
    BAD = 0
    INTERMEDIATE = 1
    GOOD = 2

    @property
    def label(self) -> str:
        return self.name.lower()


CLASSES = tuple(LinkClass)
CLASS_NAMES = tuple(c.label for c in CLASSES)
N_CLASSES = len(CLASSES)


class DomainError(ValueError):
    pass


class RangeError(IndexError):
    pass


class MissingData(ValueError):
    pass


def label_from_prr(p: float) -> LinkClass:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"PRR {p} outside [0, 1]")
    if p <= BAD_MAX:
        return LinkClass.BAD
    if p >= GOOD_MIN:
        return LinkClass.GOOD
    return LinkClass.INTERMEDIATE


def labels_from_prr(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise DomainError("PRR values outside [0, 1]")
    out = np.full(p.shape, LinkClass.INTERMEDIATE, dtype=np.int64)
    out[p <= BAD_MAX] = LinkClass.BAD
    out[p >= GOOD_MIN] = LinkClass.GOOD
    return out


def prr(mask, start: int, w: int) -> float:
    mask = np.asarray(mask, dtype=bool)
    if w < 1 or start < 0 or start + w > mask.size:
        raise RangeError(f"window [{start}, {start + w}) outside trace of length {mask.size}")
    return int(np.count_nonzero(mask[start : start + w])) / w


# ---------------------------------------------------------------------------
# Feature terms


@dataclass(frozen=True)
class Term:
    """One feature column: a base quantity optionally raised to a power."""

    base: str  # "rssi", "grad_rssi", "rssi_avg", "rssi_std"
    power: int = 1

    def __post_init__(self):
        if self.base not in _BASES:
            raise ValueError(f"unknown feature {self.base!r}")
        if self.power != 1 and (self.base not in ("rssi", "rssi_avg") or self.power not in POWERS):
            raise ValueError(f"power {self.power} not allowed for {self.base}")

    def __str__(self) -> str:
        return self.base if self.power == 1 else f"{self.base}^{self.power}"


_BASES = ("rssi", "grad_rssi", "rssi_avg", "rssi_std")
_TERM_RE = re.compile(r"^(rssi|grad_rssi|rssi_avg|rssi_std)(?:\^(-?\d+)(?:\.\.(-?\d+))?)?$")


@dataclass(frozen=True)
class FeatureSpec:
    terms: tuple[Term, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("feature spec needs at least one term")
        if len(set(self.terms)) != len(self.terms):
            raise ValueError(f"duplicate terms in {self}")

    @classmethod
    def parse(cls, text: str | Sequence[str] | "FeatureSpec") -> "FeatureSpec":
        """Parse ``"rssi,rssi_avg,rssi_std"``; ``"rssi_avg^-4..4"`` expands to
        every non-zero power in the range (power 1 is the plain term)."""
        if isinstance(text, FeatureSpec):
            return text
        items = text.split(",") if isinstance(text, str) else list(text)
        terms: list[Term] = []
        for item in items:
            item = item.strip().lower().replace(" ", "")
            m = _TERM_RE.match(item)
            if not m:
                raise ValueError(f"cannot parse feature term {item!r}")
            base, lo, hi = m.groups()
            if lo is None:
                terms.append(Term(base))
                continue
            lo = int(lo)
            hi = lo if hi is None else int(hi)
            if hi < lo:
                raise ValueError(f"empty power range in {item!r}")
            for k in range(lo, hi + 1):
                if k != 0:
                    terms.append(Term(base, k))
        return cls(tuple(terms))

    def __str__(self) -> str:
        return ",".join(str(t) for t in self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def names(self) -> list[str]:
        return [str(t) for t in self.terms]


# The fifteen feature sets compared in the feature ablation.
FEATURE_GRID = (
    "rssi",
    "grad_rssi",
    "rssi^2",
    "rssi^3",
    "rssi^4",
    "rssi^-1",
    "rssi^-2",
    "rssi^-3",
    "rssi^-4",
    "rssi_avg",
    "rssi,rssi_avg",
    "rssi,rssi_avg,rssi_std",
    "rssi_avg^1..4",
    "rssi_avg,rssi_avg^-4..-1",
    "rssi_avg^-4..4",
)


def _power(x, k: int):
    """x**k with 0**k := 0 for negative k."""
    x = np.asarray(x, dtype=np.float64)
    if k > 0:
        return x**k
    out = np.zeros_like(x)
    nz = x != 0
    out[nz] = x[nz] ** k
    return out


@dataclass(frozen=True)
class WindowConfig:
    w_history: int = 10
    w_prr: int = 10

    def validate(self, packets_per_trace: int) -> "WindowConfig":
        for name in ("w_history", "w_prr"):
            w = getattr(self, name)
            if not WINDOW_MIN <= w <= WINDOW_MAX:
                raise ValueError(f"{name}={w} outside [{WINDOW_MIN}, {WINDOW_MAX}]")
        if self.w_history + self.w_prr > packets_per_trace:
            raise ValueError(
                f"w_history + w_prr = {self.w_history + self.w_prr} exceeds "
                f"{packets_per_trace} packets per trace"
            )
        return self


def window_features(series, i: int, w_history: int, spec: FeatureSpec) -> np.ndarray:
    """Feature vector for the history window ending at position ``i``.

    This is the direct per-position definition; :func:`build_examples`
    computes the same values for a whole trace at once.
    """
    series = np.asarray(series, dtype=np.float64)
    if i < w_history - 1 or i >= series.size:
        raise RangeError(f"position {i} has no complete history window of {w_history}")
    window = series[i - w_history + 1 : i + 1]
    if np.isnan(window).any():
        raise MissingData(f"history window ending at {i} has absent readings")
    out = []
    for term in spec.terms:
        if term.base == "rssi":
            v = window[-1]
        elif term.base == "grad_rssi":
            v = series[i] - series[i - 1] if i > 0 else 0.0
        elif term.base == "rssi_avg":
            v = float(np.mean(window))
        else:
            v = float(np.std(window))
        out.append(float(_power(v, term.power)) if term.power != 1 else float(v))
    return np.array(out, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Example:
    features: np.ndarray
    label: LinkClass
    trace_index: int
    position: int


@dataclass(eq=False)
class ExampleSet:
    """Column-oriented collection of :class:`Example` rows."""

    X: np.ndarray
    y: np.ndarray
    trace_index: np.ndarray
    position: np.ndarray
    feature_names: tuple[str, ...] = ()
    dropped: int = 0

    def __post_init__(self):
        n = len(self.y)
        if not (len(self.X) == len(self.trace_index) == len(self.position) == n):
            raise ValueError("example columns have different lengths")

    def __len__(self) -> int:
        return len(self.y)

    def __getitem__(self, i) -> Example:
        return Example(self.X[i], LinkClass(int(self.y[i])), int(self.trace_index[i]), int(self.position[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def take(self, idx) -> "ExampleSet":
        idx = np.asarray(idx, dtype=np.intp)
        return ExampleSet(
            self.X[idx], self.y[idx], self.trace_index[idx], self.position[idx], self.feature_names
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=N_CLASSES)

    @classmethod
    def concat(cls, parts: Sequence["ExampleSet"], feature_names=()) -> "ExampleSet":
        if not parts:
            return cls.empty(len(feature_names), feature_names)
        return cls(
            np.concatenate([p.X for p in parts]),
            np.concatenate([p.y for p in parts]),
            np.concatenate([p.trace_index for p in parts]),
            np.concatenate([p.position for p in parts]),
            tuple(feature_names) or parts[0].feature_names,
            sum(p.dropped for p in parts),
        )

    @classmethod
    def empty(cls, d: int, feature_names=()) -> "ExampleSet":
        return cls(
            np.empty((0, d)),
            np.empty(0, np.int64),
            np.empty(0, np.int64),
            np.empty(0, np.int64),
            tuple(feature_names),
        )

    @classmethod
    def from_examples(cls, examples: Sequence[Example], feature_names=()) -> "ExampleSet":
        if not examples:
            return cls.empty(len(feature_names), feature_names)
        return cls(
            np.vstack([e.features for e in examples]),
            np.array([int(e.label) for e in examples], dtype=np.int64),
            np.array([e.trace_index for e in examples], dtype=np.int64),
            np.array([e.position for e in examples], dtype=np.int64),
            tuple(feature_names),
        )


def _rolling_sum(x: np.ndarray, w: int) -> np.ndarray:
    c = np.concatenate(([0.0], np.cumsum(x)))
    return c[w:] - c[:-w]


def build_examples(pt: PreparedTrace, wc: WindowConfig, spec: FeatureSpec, trace_index: int = 0) -> ExampleSet:
    n = len(pt)
    wc.validate(n)
    wh, wp = wc.w_history, wc.w_prr
    positions = np.arange(wh - 1, n - wp, dtype=np.int64)
    if positions.size == 0:
        return ExampleSet.empty(len(spec), spec.names)

    series = pt.rssi_series
    mask = pt.received_mask.astype(np.float64)
    # Label windows: [i+1, i+1+wp)
    received = _rolling_sum(mask, wp)[positions + 1]
    y = labels_from_prr(received / wp)

    nan = np.isnan(series)
    keep = np.ones(positions.size, dtype=bool)
    if nan.any():
        keep = _rolling_sum(nan.astype(np.float64), wh)[positions - wh + 1] == 0
    filled = np.where(nan, 0.0, series)

    # Series values are integers, so the window sums below are exact.
    s1 = _rolling_sum(filled, wh)[positions - wh + 1]
    s2 = _rolling_sum(filled * filled, wh)[positions - wh + 1]
    avg = s1 / wh
    var = np.maximum(wh * s2 - s1 * s1, 0.0) / (wh * wh)
    std = np.sqrt(var)
    current = filled[positions]
    prev = np.where(positions > 0, filled[np.maximum(positions - 1, 0)], current)
    grad = current - prev

    base = {"rssi": current, "grad_rssi": grad, "rssi_avg": avg, "rssi_std": std}
    cols = [base[t.base] if t.power == 1 else _power(base[t.base], t.power) for t in spec.terms]
    X = np.column_stack(cols)
    dropped = int((~keep).sum())
    return ExampleSet(
        X[keep],
        y[keep],
        np.full(int(keep.sum()), trace_index, dtype=np.int64),
        positions[keep],
        tuple(spec.names),
        dropped,
    )


def example_count(packets_per_trace: int, w_history: int, w_prr: int) -> int:
    return max(0, packets_per_trace - w_history - w_prr + 1)
