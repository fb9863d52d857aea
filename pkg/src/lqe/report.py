"""Report files: JSON, confusion-matrix CSV and a small SVG heatmap writer."""
from __future__ import annotations

import csv
import json
from html import escape
from pathlib import Path

import numpy as np

from .evaluate import ConfusionMatrix, EvalReport
from .featurize import CLASS_NAMES


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_confusion_csv(cm: ConfusionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["predicted\\actual", *CLASS_NAMES])
        for name, row in zip(CLASS_NAMES, cm.tolist()):
            w.writerow([name, *row])


def _shade(v: float) -> str:
    # white -> dark blue
    lo, hi = np.array([247, 251, 255]), np.array([8, 48, 107])
    r, g, b = (lo + (hi - lo) * min(max(v, 0.0), 1.0)).round().astype(int)
    return f"#{r:02x}{g:02x}{b:02x}"


def confusion_svg(cm: ConfusionMatrix, title: str = "", cell: int = 90) -> str:
    """Heatmap of the column-normalised matrix (diagonal = per-class recall)."""
    counts = cm.counts
    col = counts.sum(axis=0)
    norm = np.divide(counts, col[None, :], out=np.zeros(counts.shape), where=col[None, :] > 0)
    n = len(CLASS_NAMES)
    left, top = 110, 60 if title else 40
    width, height = left + n * cell + 20, top + n * cell + 50
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    parts.append(
        f'<text x="{left + n * cell / 2:.1f}" y="{top - 22}" text-anchor="middle" font-weight="bold">actual</text>'
    )
    y_mid = top + n * cell / 2
    parts.append(
        f'<text x="16" y="{y_mid:.1f}" text-anchor="middle" font-weight="bold" '
        f'transform="rotate(-90 16 {y_mid:.1f})">predicted</text>'
    )
    for j, name in enumerate(CLASS_NAMES):
        parts.append(f'<text x="{left + j * cell + cell / 2:.1f}" y="{top - 6}" text-anchor="middle">{name}</text>')
        parts.append(f'<text x="{left - 6}" y="{top + j * cell + cell / 2 + 4:.1f}" text-anchor="end">{name}</text>')
    for i in range(n):
        for j in range(n):
            v = float(norm[i, j])
            x, y = left + j * cell, top + i * cell
            ink = "#ffffff" if v > 0.5 else "#000000"
            parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{_shade(v)}" stroke="#888888"/>')
            parts.append(
                f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 - 2:.1f}" text-anchor="middle" fill="{ink}">{v:.1%}</text>'
            )
            parts.append(
                f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 14:.1f}" text-anchor="middle" '
                f'fill="{ink}" font-size="10">{int(counts[i, j])}</text>'
            )
    parts.append(
        f'<text x="{left}" y="{height - 14}" font-size="10">accuracy {cm.accuracy:.2%} | '
        f"columns sum to 100%</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_confusion_svg(cm: ConfusionMatrix, path, title: str = "") -> None:
    Path(path).write_text(confusion_svg(cm, title), encoding="utf-8")


def summary_row(report: EvalReport) -> dict:
    d = report.to_dict()
    return {
        "accuracy_mean": d["accuracy"]["mean"],
        "accuracy_std": d["accuracy"]["std"],
        "recall_bad": d["recall"]["bad"]["mean"],
        "recall_intermediate": d["recall"]["intermediate"]["mean"],
        "recall_good": d["recall"]["good"]["mean"],
        "accuracy_pooled": d["pooled"]["accuracy"],
    }


SUMMARY_METRICS = (
    "accuracy_mean",
    "accuracy_std",
    "recall_bad",
    "recall_intermediate",
    "recall_good",
    "accuracy_pooled",
    "status",
)


def write_summary_csv(rows: list[dict], axis_columns: list[str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*axis_columns, *SUMMARY_METRICS])
        for row in rows:
            out = []
            for col in (*axis_columns, *SUMMARY_METRICS):
                v = row.get(col)
                out.append("" if v is None else f"{v:.6f}" if isinstance(v, float) else v)
            w.writerow(out)
