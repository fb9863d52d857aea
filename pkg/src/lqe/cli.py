"""``lqe`` command line: synth, stats, run and ablate.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 ablation cells
failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiment import (
    AXES,
    EXIT_CELLS,
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_OK,
    ConfigError,
    DataSource,
    PipelineConfig,
    PipelineError,
    ablate,
    run,
)
from .synthgen import PRESETS, SynthConfig, generate, ground_truth, write_ground_truth
from .synthgen import ConfigError as SynthConfigError
from .trace_model import TraceError, load_any, trace_stats, write_canonical_csv

log = logging.getLogger("lqe")

_OVERRIDES = {
    "interp": "interp",
    "features": "features",
    "w_history": "w_history",
    "w_prr": "w_prr",
    "resample": "resample",
    "model": "model",
    "k": "k",
    "repeats": "repeats",
    "seed": "seed",
}


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _synth_dict(value: str) -> dict:
    """A preset name or a path to a synth config JSON."""
    if value in PRESETS:
        return {"preset": value}
    return _read_json(value)


def _pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="pipeline config JSON")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", help="raw trace directory or canonical CSV file")
    src.add_argument("--synth", metavar="PRESET|JSON", help=f"synthetic data: one of {sorted(PRESETS)} or a JSON file")
    p.add_argument("--interp", choices=["none", "gaussian", "zero"])
    p.add_argument("--features", help="e.g. rssi,rssi_avg,rssi_std or rssi_avg^-4..4")
    p.add_argument("--w-history", dest="w_history", type=int)
    p.add_argument("--w-prr", dest="w_prr", type=int)
    p.add_argument("--resample", choices=["none", "ros", "rus"])
    p.add_argument("--model", choices=["majority", "logreg", "svm", "dtree", "rforest", "mlp"])
    p.add_argument("--hp", action="append", default=[], metavar="KEY=JSON", help="hyperparameter override")
    p.add_argument("--k", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--group-by-link", action="store_true", default=None, help="keep each trace in one fold")
    p.add_argument("--out", required=True, help="output directory")


def _pipeline_config(args) -> PipelineConfig:
    d = _read_json(args.config) if args.config else {}
    if args.data:
        d["data"] = {"kind": DataSource.from_path(args.data).kind, "path": args.data}
    elif args.synth:
        d["data"] = {"kind": "synth", "synth": _synth_dict(args.synth)}
    for attr, key in _OVERRIDES.items():
        v = getattr(args, attr)
        if v is not None:
            d[key] = v
    if args.group_by_link:
        d["group_by_link"] = True
    if args.hp:
        hp = dict(d.get("hyperparams", {}))
        for item in args.hp:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"--hp expects KEY=VALUE, got {item!r}")
            try:
                hp[key] = json.loads(value)
            except json.JSONDecodeError:
                hp[key] = value
        d["hyperparams"] = hp
    return PipelineConfig.from_dict(d)


def cmd_synth(args) -> int:
    d = _read_json(args.config) if args.config else {"preset": args.preset}
    if args.seed is not None:
        d["seed"] = args.seed
    cfg = SynthConfig.from_dict(d)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ts = generate(cfg)
    write_canonical_csv(ts, out / "traces.csv")
    write_ground_truth(ground_truth(cfg), out / "ground_truth.csv")
    (out / "synth_config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(ts)} traces to {out / 'traces.csv'}")
    return EXIT_OK


def cmd_stats(args) -> int:
    if args.synth:
        ts = generate(SynthConfig.from_dict(_synth_dict(args.synth)))
    else:
        ts = load_any(args.data, args.packets_per_trace)
    st = trace_stats(ts)
    if args.json:
        print(json.dumps(st.as_dict(), indent=2))
        return EXIT_OK
    empty_pct = st.n_empty_traces / st.n_traces if st.n_traces else 0.0
    print(f"traces             {st.n_traces:,}")
    print(f"empty traces       {st.n_empty_traces:,} ({empty_pct:.2%})")
    print(f"packets sent       {st.packets_sent:,}")
    print(f"packets received   {st.packets_received:,} ({st.received_fraction:.2%})")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _pipeline_config(args)
    report = run(cfg, args.out)
    d = report.to_dict()
    print(
        f"accuracy {d['accuracy']['mean']:.4f} +- {d['accuracy']['std']:.4f}  "
        + "  ".join(f"recall[{c}] {v['mean']:.3f}" for c, v in d["recall"].items() if v["mean"] is not None)
    )
    print(f"reports in {args.out}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    base = _pipeline_config(args)
    rows = ablate(args.axis, base, args.out, jobs=args.jobs, diagonal=args.diagonal)
    failed = [r for r in rows if r.get("status") != "ok"]
    print(f"{len(rows)} cells, {len(failed)} failed; summary in {Path(args.out) / 'summary.csv'}")
    return EXIT_CELLS if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lqe", description="Link quality classification pipeline")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic trace set")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--config", help="synth config JSON (may name a 'preset')")
    g.add_argument("--preset", choices=sorted(PRESETS), default="rutgers-like")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="trace-set statistics")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="raw trace directory or canonical CSV file")
    src.add_argument("--synth", metavar="PRESET|JSON")
    p.add_argument("--packets-per-trace", type=int, default=300)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("run", help="cross-validate one pipeline configuration")
    _pipeline_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ablate", help="vary one pipeline axis")
    p.add_argument("axis", choices=AXES)
    _pipeline_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--diagonal", action="store_true", help="windows axis: only w_history == w_prr")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (SynthConfigError, ValueError) as exc:
        print(f"error: [config] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TraceError, OSError) as exc:
        print(f"error: [data] {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
