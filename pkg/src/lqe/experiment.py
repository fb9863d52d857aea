"""Pipeline configuration, single runs and the one-axis ablation grids."""
from __future__ import annotations

import json
import logging
import platform
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import kernels, learn
from .evaluate import EvalReport, cross_validate
from .featurize import FEATURE_GRID, WINDOW_GRID, ExampleSet, FeatureSpec, WindowConfig, build_examples
from .preprocess import InterpolationStrategy, interpolate, trace_seed
from .report import dump_json, summary_row, write_confusion_csv, write_confusion_svg, write_summary_csv
from .resample import ResampleStrategy
from .synthgen import ConfigError as SynthConfigError
from .synthgen import SynthConfig, generate
from .trace_model import PACKETS_PER_TRACE, TraceError, TraceSet, load_trace_set, read_canonical_csv

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_CELLS = 0, 1, 2, 3


class PipelineError(Exception):
    """A failure attributed to one pipeline stage, with the CLI exit code."""

    def __init__(self, stage: str, message: str, exit_code: int = EXIT_CONFIG):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = exit_code


class ConfigError(PipelineError):
    def __init__(self, message: str):
        super().__init__("config", message, EXIT_CONFIG)


@dataclass(frozen=True)
class DataSource:
    kind: str  # "rutgers" | "csv" | "synth"
    path: str | None = None
    synth: dict | None = None
    packets_per_trace: int = PACKETS_PER_TRACE

    def __post_init__(self):
        if self.kind not in ("rutgers", "csv", "synth"):
            raise ConfigError(f"data.kind must be rutgers, csv or synth, not {self.kind!r}")
        if self.kind == "synth" and self.synth is None:
            raise ConfigError("data.kind synth requires a data.synth object")
        if self.kind != "synth" and not self.path:
            raise ConfigError(f"data.kind {self.kind} requires data.path")

    @classmethod
    def from_path(cls, path) -> "DataSource":
        p = Path(path)
        return cls("rutgers" if p.is_dir() else "csv", str(path))

    def load(self) -> TraceSet:
        try:
            if self.kind == "synth":
                return generate(SynthConfig.from_dict(self.synth))
            if self.kind == "rutgers":
                return load_trace_set(self.path, self.packets_per_trace)
            return read_canonical_csv(self.path)
        except SynthConfigError as exc:
            raise PipelineError("data", str(exc), EXIT_CONFIG) from exc
        except (TraceError, OSError) as exc:
            raise PipelineError("data", str(exc), EXIT_DATA) from exc


@dataclass(frozen=True)
class PipelineConfig:
    data: DataSource
    interp: str = "zero"
    features: str = "rssi,rssi_avg,rssi_std"
    w_history: int = 10
    w_prr: int = 10
    resample: str = "ros"
    model: str = "dtree"
    hyperparams: dict = field(default_factory=dict)
    k: int = 10
    repeats: int = 10
    seed: int = 0
    group_by_link: bool = False

    def validate(self) -> "PipelineConfig":
        try:
            InterpolationStrategy.parse(self.interp)
            FeatureSpec.parse(self.features)
            ResampleStrategy.parse(self.resample)
            learn.hyperparams(self.model, self.hyperparams)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.k < 2 or self.repeats < 1:
            raise ConfigError("need k >= 2 and repeats >= 1")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["features"] = str(FeatureSpec.parse(self.features))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "data" not in d:
            raise ConfigError("config needs a data source")
        data = d.pop("data")
        if isinstance(data, str):
            data = DataSource.from_path(data)
        elif isinstance(data, dict):
            try:
                data = DataSource(**data)
            except TypeError as exc:
                raise ConfigError(f"bad data source: {exc}") from None
        try:
            return cls(data=data, **d).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None


def featurize_traces(ts: TraceSet, cfg: PipelineConfig) -> ExampleSet:
    strategy = InterpolationStrategy.parse(cfg.interp)
    spec = FeatureSpec.parse(cfg.features)
    wc = WindowConfig(cfg.w_history, cfg.w_prr)
    try:
        wc.validate(ts.packets_per_trace)
    except ValueError as exc:
        raise PipelineError("featurize", str(exc), EXIT_CONFIG) from None
    parts = [
        build_examples(interpolate(t, strategy, trace_seed(cfg.seed, i)), wc, spec, i)
        for i, t in enumerate(ts)
    ]
    return ExampleSet.concat(parts, spec.names)


_DATASETS: dict = {}


def build_dataset(cfg: PipelineConfig) -> ExampleSet:
    key = json.dumps(
        [asdict(cfg.data), cfg.interp, str(FeatureSpec.parse(cfg.features)), cfg.w_history, cfg.w_prr, cfg.seed],
        sort_keys=True,
    )
    if key not in _DATASETS:
        _DATASETS.clear()  # keep only the most recent dataset in memory
        _DATASETS[key] = featurize_traces(cfg.data.load(), cfg)
    return _DATASETS[key]


def evaluate_config(cfg: PipelineConfig) -> EvalReport:
    cfg.validate()
    examples = build_dataset(cfg)
    if len(examples) == 0:
        raise PipelineError("featurize", "no examples produced")
    try:
        report = cross_validate(
            examples,
            cfg.model,
            cfg.hyperparams,
            cfg.resample,
            k=cfg.k,
            repeats=cfg.repeats,
            seed=cfg.seed,
            group_by_link=cfg.group_by_link,
        )
    except ValueError as exc:
        raise PipelineError("evaluate", str(exc), EXIT_DATA) from exc
    report.config = {"pipeline": cfg.to_dict(), "evaluation": report.config, "dropped_examples": examples.dropped}
    return report


def run(cfg: PipelineConfig, out) -> EvalReport:
    """Evaluate ``cfg`` and write report.json, confusion.csv/.svg, config.json
    and metadata.json (the only file with timings) into ``out``."""
    out = Path(out)
    started = time.perf_counter()
    report = evaluate_config(cfg)
    out.mkdir(parents=True, exist_ok=True)
    dump_json(report.to_dict(), out / "report.json")
    dump_json(cfg.to_dict(), out / "config.json")
    pooled = report.pooled
    write_confusion_csv(pooled, out / "confusion.csv")
    title = f"{cfg.model} | {cfg.features} | W={cfg.w_history}/{cfg.w_prr} | {cfg.resample} | {cfg.interp}"
    write_confusion_svg(pooled, out / "confusion.svg", title)
    dump_json(
        {
            **report.timing,
            "run_seconds": time.perf_counter() - started,
            "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "kernel_backend": kernels.BACKEND,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        out / "metadata.json",
    )
    return report


# ---------------------------------------------------------------------------
# Ablations

AXES = ("interpolation", "features", "windows", "resampling", "models")


def grid_cells(axis: str, base: PipelineConfig, diagonal: bool = False) -> list[tuple[dict, PipelineConfig]]:
    """(axis values, config) for every cell of one ablation axis."""
    if axis == "interpolation":
        return [({"interp": s.value}, replace(base, interp=s.value)) for s in InterpolationStrategy]
    if axis == "features":
        return [({"features": str(FeatureSpec.parse(f))}, replace(base, features=f)) for f in FEATURE_GRID]
    if axis == "windows":
        pairs = [(w, w) for w in WINDOW_GRID] if diagonal else [(h, p) for h in WINDOW_GRID for p in WINDOW_GRID]
        return [({"w_history": h, "w_prr": p}, replace(base, w_history=h, w_prr=p)) for h, p in pairs]
    if axis == "resampling":
        return [({"resample": s}, replace(base, resample=s)) for s in ("none", "rus", "ros")]
    if axis == "models":
        cells = []
        for kind in learn.ModelKind:
            hp = base.hyperparams if kind.value == base.model else {}
            cells.append(({"model": kind.value}, replace(base, model=kind.value, hyperparams=hp)))
        return cells
    raise ConfigError(f"unknown ablation axis {axis!r}; choose from {AXES}")


def _cell_dir(i: int, values: dict) -> str:
    name = "_".join(f"{k}={v}" for k, v in values.items())
    return f"{i:02d}-" + re.sub(r"[^A-Za-z0-9_.=+-]", lambda m: {",": "+", "^": "p"}.get(m.group(0), "_"), name)


def _run_cell(args):
    i, values, cfg, out = args
    row = dict(values)
    try:
        report = run(cfg, out / _cell_dir(i, values))
    except Exception as exc:  # noqa: BLE001  one failed cell must not stop the grid
        log.error("cell %s failed: %s", values, exc)
        row.update(status=f"failed: {exc}")
        return row
    row.update(summary_row(report), status="ok")
    return row


def ablate(axis: str, base: PipelineConfig, out, jobs: int = 1, diagonal: bool = False) -> list[dict]:
    base.validate()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    cells = grid_cells(axis, base, diagonal)
    tasks = [(i, values, cfg, out) for i, (values, cfg) in enumerate(cells)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, tasks))
    else:
        rows = [_run_cell(t) for t in tasks]
    columns = list(cells[0][0])
    write_summary_csv(rows, columns, out / "summary.csv")
    dump_json({"axis": axis, "base": base.to_dict(), "diagonal": diagonal, "cells": len(rows)}, out / "grid.json")
    return rows
