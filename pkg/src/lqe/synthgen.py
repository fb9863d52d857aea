"""Synthetic link traces with a known logistic PRR-vs-SNR link model.

Each link gets a base SNR drawn uniformly from ``snr_range_db``; at noise
level ``n`` the SNR is lowered by ``n - min(noise_levels_dbm)`` dB.  Packets
are received independently with probability
``1 / (1 + exp(-(snr - prr_midpoint_db) / prr_slope_db))``.

Random streams come from NumPy's PCG64 seeded through ``SeedSequence``:
the base SNR of link ``l`` uses entropy ``(seed, 0, l)`` and the packets of
link ``l`` at noise index ``j`` use ``(seed, 1, l, j)``.  Packet ``i``
consumes the ``i``-th uniform and the ``i``-th normal of its trace stream, so
streams do not depend on generation order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .featurize import label_from_prr
from .trace_model import NOISE_LEVELS_DBM, RSSI_MAX, LinkTrace, TraceSet


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_links: int = 100
    packets_per_trace: int = 300
    noise_levels_dbm: tuple[int, ...] = NOISE_LEVELS_DBM
    seed: int = 0
    snr_range_db: tuple[float, float] = (-5.0, 30.0)
    prr_midpoint_db: float = 5.0
    prr_slope_db: float = 1.0
    rssi_gain: float = 2.0
    rssi_offset: float = 10.0
    rssi_sigma: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "noise_levels_dbm", tuple(int(n) for n in self.noise_levels_dbm))
        object.__setattr__(self, "snr_range_db", tuple(float(v) for v in self.snr_range_db))

    def validate(self) -> "SynthConfig":
        if self.n_links < 1:
            raise ConfigError("n_links must be >= 1")
        if self.packets_per_trace < 1:
            raise ConfigError("packets_per_trace must be >= 1")
        if not self.prr_slope_db > 0:
            raise ConfigError("prr_slope_db must be > 0")
        if self.rssi_sigma < 0:
            raise ConfigError("rssi_sigma must be >= 0")
        lo, hi = self.snr_range_db
        if not lo <= hi:
            raise ConfigError("snr_range_db must satisfy lo <= hi")
        if not self.noise_levels_dbm or any(n not in NOISE_LEVELS_DBM for n in self.noise_levels_dbm):
            raise ConfigError(f"noise levels must be a non-empty subset of {NOISE_LEVELS_DBM}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise_levels_dbm"] = list(self.noise_levels_dbm)
        d["snr_range_db"] = list(self.snr_range_db)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        d = dict(d)
        preset = d.pop("preset", None)
        base = PRESETS[preset] if preset else cls()
        unknown = set(d) - set(base.to_dict())
        if unknown:
            raise ConfigError(f"unknown synth config fields: {sorted(unknown)}")
        if "snr_range_db" in d:
            d["snr_range_db"] = tuple(d["snr_range_db"])
        if "noise_levels_dbm" in d:
            d["noise_levels_dbm"] = tuple(d["noise_levels_dbm"])
        try:
            return replace(base, **d).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


# Calibrated so that W=10/10 windows split roughly 61/34/5 good/bad/intermediate.
RUTGERS_LIKE = SynthConfig(
    n_links=160,
    snr_range_db=(0.0, 40.0),
    prr_midpoint_db=6.0,
    prr_slope_db=0.5,
    rssi_gain=1.5,
    rssi_offset=12.0,
    rssi_sigma=3.0,
)

PRESETS = {"default": SynthConfig(), "rutgers-like": RUTGERS_LIKE}


def true_prr(snr, midpoint: float, slope: float):
    z = (np.asarray(snr, dtype=np.float64) - midpoint) / slope
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _stream(*entropy: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(entropy))))


def link_endpoints(n_links: int) -> list[tuple[int, int]]:
    """Ordered (src, dst) pairs over the smallest node set that has enough."""
    n_nodes = 2
    while n_nodes * (n_nodes - 1) < n_links:
        n_nodes += 1
    pairs = [(s, d) for s in range(1, n_nodes + 1) for d in range(1, n_nodes + 1) if s != d]
    return pairs[:n_links]


def base_snr(cfg: SynthConfig) -> np.ndarray:
    lo, hi = cfg.snr_range_db
    return np.array([lo + (hi - lo) * _stream(cfg.seed, 0, l).random() for l in range(cfg.n_links)])


def trace_snr(cfg: SynthConfig, base: float, noise_dbm: int) -> float:
    return float(base) - (noise_dbm - min(cfg.noise_levels_dbm))


def trace_deviates(cfg: SynthConfig, link: int, noise_index: int) -> tuple[np.ndarray, np.ndarray]:
    rng = _stream(cfg.seed, 1, link, noise_index)
    u = rng.random(cfg.packets_per_trace)
    z = rng.standard_normal(cfg.packets_per_trace)
    return u, z


def simulate_trace(cfg: SynthConfig, snr: float, u: np.ndarray, z: np.ndarray) -> list[int | None]:
    p = float(true_prr(snr, cfg.prr_midpoint_db, cfg.prr_slope_db))
    received = u < p
    rssi = np.rint(np.clip(cfg.rssi_gain * snr + cfg.rssi_offset + cfg.rssi_sigma * z, 0, RSSI_MAX))
    return [int(r) if ok else None for r, ok in zip(rssi, received)]


def generate(cfg: SynthConfig) -> TraceSet:
    cfg.validate()
    ends = link_endpoints(cfg.n_links)
    snr0 = base_snr(cfg)
    traces = []
    for j, noise in enumerate(cfg.noise_levels_dbm):
        for l, (src, dst) in enumerate(ends):
            u, z = trace_deviates(cfg, l, j)
            readings = simulate_trace(cfg, trace_snr(cfg, snr0[l], noise), u, z)
            traces.append(LinkTrace.from_readings(src, dst, noise, readings))
    traces.sort(key=lambda t: t.key)
    return TraceSet(tuple(traces), cfg.packets_per_trace)


@dataclass(frozen=True)
class GroundTruth:
    link_id: int
    src: int
    dst: int
    noise_dbm: int
    snr: float
    true_prr: float
    true_class: str


def ground_truth(cfg: SynthConfig) -> list[GroundTruth]:
    """Per-trace link model values, in the same order as :func:`generate`."""
    cfg.validate()
    ends = link_endpoints(cfg.n_links)
    snr0 = base_snr(cfg)
    rows = []
    for noise in cfg.noise_levels_dbm:
        for l, (src, dst) in enumerate(ends):
            snr = trace_snr(cfg, snr0[l], noise)
            p = float(true_prr(snr, cfg.prr_midpoint_db, cfg.prr_slope_db))
            rows.append(GroundTruth(l, src, dst, noise, snr, p, label_from_prr(p).label))
    rows.sort(key=lambda r: (r.noise_dbm, r.src, r.dst))
    return rows


def write_ground_truth(rows: list[GroundTruth], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("link_id", "src", "dst", "noise_dbm", "snr", "true_prr", "true_class"))
        for r in rows:
            w.writerow((r.link_id, r.src, r.dst, r.noise_dbm, repr(r.snr), repr(r.true_prr), r.true_class))


def binomial_band(p: float, n: int, k: float = 3.0) -> float:
    return k * math.sqrt(p * (1 - p) / n)
