"""Aggregation and report files.

``runs.csv`` holds one record per row and no timing column, so two runs of
the same configuration produce identical bytes; wall times go to
``timings.csv``.
"""

from __future__ import annotations

import csv
import logging
import shutil
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .runner import PAIRWISE_METRICS, STRUCTURE_METRICS

log = logging.getLogger(__name__)

METRICS = STRUCTURE_METRICS + PAIRWISE_METRICS
KEY_COLUMNS = ("dataset", "mechanism", "level", "algorithm")
RUN_COLUMNS = KEY_COLUMNS + ("repetition", "seed_path", "status", "reason") + METRICS
REPORT_FILES = ("runs.csv", "timings.csv", "summary.csv")


class OutputExistsError(FileExistsError):
    pass


@dataclass(frozen=True)
class CellSummary:
    dataset: str
    mechanism: str
    level: object
    algorithm: str
    metric: str
    n: int
    mean: float
    min: float
    max: float
    histogram: dict  # value -> count


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def summarize(records) -> list:
    """Per (dataset, mechanism, level, algorithm, metric): mean, min, max and
    the value histogram. Cells without a successful run are left out with a
    warning."""
    cells, order = {}, []
    for r in records:
        k = (r.dataset, r.mechanism, r.level, r.algorithm)
        if k not in cells:
            cells[k] = []
            order.append(k)
        if r.status == "ok":
            cells[k].append(r)
    out = []
    for k in order:
        runs = cells[k]
        if not runs:
            log.warning("no successful runs for cell %s; left out of the summary", k)
            continue
        for m in METRICS:
            vals = [r.metrics[m] for r in runs if m in r.metrics]
            if not vals:
                continue
            hist = dict(sorted(Counter(vals).items()))
            out.append(
                CellSummary(*k, m, len(vals), float(np.mean(vals)), min(vals), max(vals), hist)
            )
    return out


def _hist_str(hist: dict) -> str:
    return ";".join(f"{_fmt(v)}:{c}" for v, c in hist.items())


def _write(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def prepare_out_dir(out_dir, force: bool = False) -> Path:
    out = Path(out_dir)
    if out.exists():
        if not out.is_dir():
            raise OutputExistsError(f"{out} exists and is not a directory")
        if any(out.iterdir()):
            if not force:
                raise OutputExistsError(f"{out} is not empty; pass --force to overwrite")
            for name in REPORT_FILES:
                (out / name).unlink(missing_ok=True)
            shutil.rmtree(out / "plots", ignore_errors=True)
    out.mkdir(parents=True, exist_ok=True)
    return out


def emit_reports(records, out_dir, force: bool = False, svg: bool = False) -> list:
    """Write runs.csv, timings.csv, summary.csv and plots/*.csv; returns the paths."""
    out = prepare_out_dir(out_dir, force)
    written = []

    rows = []
    for r in records:
        row = [_fmt(getattr(r, c)) for c in RUN_COLUMNS[:8]]
        row += [_fmt(r.metrics.get(m)) for m in METRICS]
        rows.append(row)
    _write(out / "runs.csv", RUN_COLUMNS, rows)
    written.append(out / "runs.csv")

    _write(
        out / "timings.csv",
        KEY_COLUMNS + ("repetition", "status", "wall_time"),
        [[_fmt(getattr(r, c)) for c in KEY_COLUMNS + ("repetition", "status")] + [f"{r.wall_time:.6f}"] for r in records],
    )
    written.append(out / "timings.csv")

    summary = summarize(records)
    _write(
        out / "summary.csv",
        KEY_COLUMNS + ("metric", "n", "mean", "min", "max", "histogram"),
        [
            [s.dataset, s.mechanism, _fmt(s.level), s.algorithm, s.metric, s.n, _fmt(s.mean), _fmt(s.min), _fmt(s.max), _hist_str(s.histogram)]
            for s in summary
        ],
    )
    written.append(out / "summary.csv")

    # plot data: one file per dataset, algorithm and headline metric,
    # x = mechanism/level, y = value with its frequency
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    groups = {}
    for s in summary:
        if s.metric in ("shd", "f1", "weighted_accuracy"):
            groups.setdefault((s.dataset, s.algorithm, s.metric), []).append(s)
    for (ds, algo, metric), cells in groups.items():
        path = plots / f"{_slug(ds)}__{_slug(algo)}__{metric}.csv"
        _write(
            path,
            ("mechanism", "level", "value", "count"),
            [[c.mechanism, _fmt(c.level), _fmt(v), n] for c in cells for v, n in c.histogram.items()],
        )
        written.append(path)
        if svg:
            p = _svg(cells, plots / path.with_suffix(".svg").name, f"{ds} {algo}", metric)
            if p:
                written.append(p)
    return written


def _slug(s: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in s)


def _svg(cells, path: Path, title: str, metric: str):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib not installed; skipping %s", path.name)
        return None
    labels, data = [], []
    for c in cells:
        labels.append(c.mechanism if c.level is None else f"{c.mechanism}\n{c.level}")
        data.append([v for v, n in c.histogram.items() for _ in range(n)])
    fig, ax = plt.subplots(figsize=(max(4, 0.8 * len(cells)), 3.5))
    ax.boxplot(data)
    ax.set_xticks(range(1, len(labels) + 1), labels, rotation=90, fontsize=6)
    ax.set_ylabel(metric)
    ax.set_title(title, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
