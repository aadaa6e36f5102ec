"""Command-line interface.

Exit codes: 0 success, 2 bad input or configuration, 3 when some experiment
cell failed in every repetition.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import tuning
from .bench.config import ConfigError, load_config
from .bench.reports import OutputExistsError, emit_reports
from .bench.runner import run_experiment, totally_failed_cells
from .data import Domain, discretize, discretize_auto, ingest_csv, read_dataset, write_dataset
from .discovery import PAIRWISE, CiTestConfig, bic_hill_climb, pc
from .errors import DataError, InfeasibleError
from .graphs import Dag, GraphError, read_graph, write_graph
from .mechanisms import MechanismSpec, audit_effective_eps, build_mechanism, privatize_dataset
from .mechanisms.audit import bayes_success, log_channel_of
from .metrics import shd, skeleton_f1
from .rng import RngSeed

EXIT_CONFIG = 2
EXIT_CELL_FAILURE = 3

_INPUT_ERRORS = (ConfigError, DataError, InfeasibleError, GraphError, OutputExistsError, ValueError, OSError)


class _Ctx:
    def __init__(self, seed, out, force):
        self.seed = seed
        self.out = Path(out) if out else None
        self.force = force

    def rng(self) -> RngSeed:
        return RngSeed(self.seed or 0)

    def require_out(self) -> Path:
        if self.out is None:
            raise click.UsageError("this command needs --out")
        return self.out

    def check_overwrite(self, *paths):
        for p in paths:
            if p.exists() and not self.force:
                raise OutputExistsError(f"{p} exists; pass --force to overwrite")

    def emit_text(self, text: str):
        if self.out is None:
            click.echo(text, nl=False)
        else:
            self.check_overwrite(self.out)
            self.out.write_text(text, encoding="utf-8")


def _fail(exc: Exception):
    click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_CONFIG)


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except _INPUT_ERRORS as exc:
            _fail(exc)


def _dims(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from None


def _domain(dims, dataset) -> Domain:
    if (dims is None) == (dataset is None):
        raise click.UsageError("give exactly one of --dims and --dataset")
    return Domain(_dims(dims)) if dims else read_dataset(dataset).domain


@click.group(cls=_Group)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Master seed (default 0, or the config's seed).")
@click.option("--out", type=click.Path(), default=None, help="Output file or directory.")
@click.option("--force", is_flag=True, help="Overwrite existing outputs.")
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def main(ctx, seed, out, force, verbose):
    """Locally private data and causal discovery benchmarks."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    ctx.obj = _Ctx(seed, out, force)


@main.command("discretize")
@click.argument("input_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--bins", default="auto", help="Bins per column: an integer, comma-separated list, or 'auto'.")
@click.option("--no-header", is_flag=True)
@click.pass_obj
def discretize_cmd(obj, input_csv, bins, no_header):
    """Uniform-width discretization of a numeric CSV."""
    table = ingest_csv(input_csv, has_header=not no_header)
    if bins == "auto":
        ds = discretize_auto(table)
    else:
        b = _dims(bins)
        ds = discretize(table, b * table.d if len(b) == 1 else b)
    out = obj.require_out()
    obj.check_overwrite(out)
    write_dataset(ds, out)


_mech_options = [
    click.option("--kind", required=True, type=click.Choice(["krr_cwise", "krr_comb", "geo_cwise", "geo_comb"])),
    click.option("--norm", default="euclidean", type=click.Choice(["manhattan", "euclidean", "chebyshev"])),
    click.option("--mode", default="resample", type=click.Choice(["resample", "clip", "uniform_replace"])),
    click.option("--cwise-split", default="joint", type=click.Choice(["joint", "per_attribute"])),
]


def _with_mech_options(f):
    for opt in reversed(_mech_options):
        f = opt(f)
    return f


def _spec(kind, level, epsilon, norm, mode, cwise_split, domain) -> MechanismSpec:
    if (level is None) == (epsilon is None):
        raise click.UsageError("give exactly one of --level and --epsilon")
    geo = kind.startswith("geo")
    extra = {"norm": norm, "mode": mode} if geo else {}
    if epsilon is not None:
        return MechanismSpec(kind, epsilon=epsilon, cwise_split=cwise_split, **extra)
    specs, errors = tuning.matched_specs(level, domain, [kind], cwise_split=cwise_split, **extra)
    if errors:
        raise InfeasibleError(errors[kind])
    return specs[0]


@main.command("privatize")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@_with_mech_options
@click.option("--level", type=float, default=None, help="Privacy level (attacker success probability).")
@click.option("--epsilon", type=float, default=None, help="LDP budget (k-RR kinds only).")
@click.pass_obj
def privatize_cmd(obj, dataset, kind, norm, mode, cwise_split, level, epsilon):
    """Privatize every record of a discretized dataset."""
    ds = read_dataset(dataset)
    spec = _spec(kind, level, epsilon, norm, mode, cwise_split, ds.domain)
    out = obj.require_out()
    obj.check_overwrite(out)
    write_dataset(privatize_dataset(ds, spec, obj.rng()), out)


@main.command("tune")
@click.option("--dims", default=None, help="Attribute sizes, e.g. 10,10,10.")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--levels", default=",".join(str(v) for v in tuning.DEFAULT_LEVELS))
@click.option("--cwise-split", default="joint", type=click.Choice(["joint", "per_attribute"]))
@click.option("--norm", default="euclidean", type=click.Choice(["manhattan", "euclidean", "chebyshev"]))
@click.pass_obj
def tune_cmd(obj, dims, dataset, levels, cwise_split, norm):
    """Matched parameters of all four mechanisms per privacy level (CSV)."""
    domain = _domain(dims, dataset)
    kinds = ["krr_cwise", "krr_comb", "geo_cwise", "geo_comb"]
    rows = []
    for lv in (float(v) for v in levels.split(",")):
        specs, errors = tuning.matched_specs(lv, domain, kinds, cwise_split=cwise_split, norm=norm)
        by_kind = {s.kind.value: s for s in specs}
        for kind in kinds:
            if kind in errors:
                rows.append([lv, kind, "", "", "", "infeasible", errors[kind]])
                continue
            eps, pmax = _tuned_params(build_mechanism(by_kind[kind], domain))
            rows.append([lv, kind, eps, pmax, cwise_split if "cwise" in kind else "", "ok", ""])
    buf = _csv_text(["level", "kind", "epsilon", "max_prob", "cwise_split", "status", "reason"], rows)
    obj.emit_text(buf)


def _join(vals) -> str:
    return ";".join(repr(float(v)) for v in vals)


def _tuned_params(mech) -> tuple:
    """(epsilon, max_prob) columns; per-attribute values are ';'-joined."""
    if hasattr(mech, "tables"):
        return "", _join(t.p_max for t in mech.tables)
    if hasattr(mech, "table"):
        return "", _join([mech.table.p_max])
    params = mech.params if isinstance(mech.params, list) else [mech.params]
    return _join(p.epsilon for p in params), _join(p.p for p in params)


def _csv_text(header, rows) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


@main.command("discover")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--algo", required=True, type=click.Choice(["pc", "bic", *PAIRWISE]))
@click.option("--test", default="fisherz", type=click.Choice(["fisherz", "chi2"]))
@click.option("--alpha", default=0.05, type=float)
@click.option("--penalty-discount", default=1.0, type=float)
@click.pass_obj
def discover_cmd(obj, dataset, algo, test, alpha, penalty_discount):
    """Learn a graph (pc, bic) or decide a pair's direction (two-column data)."""
    ds = read_dataset(dataset)
    if algo in PAIRWISE:
        if ds.domain.d != 2:
            raise DataError("pairwise methods need exactly two columns")
        dec = PAIRWISE[algo](ds.column(0), ds.column(1))
        obj.emit_text(json.dumps({"direction": dec.direction, "score": dec.score, "forced": dec.forced}) + "\n")
        return
    if algo == "pc":
        g = pc(ds, CiTestConfig(test, alpha))
    else:
        if penalty_discount <= 0:
            raise ValueError("penalty discount must be positive")
        g = bic_hill_climb(ds, penalty_discount).to_mixed()
    if obj.out is None:
        click.echo(json.dumps(g.to_dict(), indent=2))
    else:
        obj.check_overwrite(obj.out)
        write_graph(g, obj.out)


@main.command("evaluate")
@click.argument("truth", type=click.Path(exists=True, dir_okay=False))
@click.argument("estimate", type=click.Path(exists=True, dir_okay=False))
@click.option("--shd-target", default="cpdag", type=click.Choice(["dag", "cpdag"]))
@click.pass_obj
def evaluate_cmd(obj, truth, estimate, shd_target):
    """SHD and skeleton F1 of an estimated graph against the truth."""
    # fully directed acyclic inputs are read as DAGs and compared by class
    t, e = (Dag.from_mixed(g) if g.is_dag() else g for g in (read_graph(truth), read_graph(estimate)))
    f1 = skeleton_f1(t, e)
    res = {"shd": shd(t, e, shd_target), **dataclasses.asdict(f1)}
    obj.emit_text(json.dumps(res) + "\n")


@main.command("experiment")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--workers", type=click.IntRange(1), default=None)
@click.option("--svg", is_flag=True, help="Also draw SVG box plots (needs matplotlib).")
@click.pass_obj
def experiment_cmd(obj, config, workers, svg):
    """Run a full experiment grid from a TOML config."""
    cfg = load_config(config)
    if obj.seed is not None:
        cfg = dataclasses.replace(cfg, seed=obj.seed)
    out = obj.out or cfg.resolve(cfg.output_dir)
    records = run_experiment(cfg, workers=workers)
    emit_reports(records, out, force=obj.force, svg=svg)
    n_ok = sum(r.status == "ok" for r in records)
    n_skip = sum(r.status == "skipped" for r in records)
    click.echo(f"{n_ok} runs, {n_skip} skipped cells, reports in {out}")
    failed = totally_failed_cells(records)
    if failed:
        for cell in failed:
            click.echo(f"cell failed in every repetition: {cell}", err=True)
        sys.exit(EXIT_CELL_FAILURE)


@main.command("audit")
@click.option("--dims", default=None, help="Attribute sizes, e.g. 5,5.")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), default=None)
@_with_mech_options
@click.option("--level", type=float, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--matrix", type=click.Path(dir_okay=False), default=None, help="Write the channel matrix as CSV.")
@click.pass_obj
def audit_cmd(obj, dims, dataset, kind, norm, mode, cwise_split, level, epsilon, matrix):
    """Empirical LDP and d-privacy parameters of a mechanism's exact channel."""
    domain = _domain(dims, dataset)
    mech = build_mechanism(_spec(kind, level, epsilon, norm, mode, cwise_split, domain), domain)
    res = audit_effective_eps(mech, domain)
    res["bayes_success"] = bayes_success(log_channel_of(mech))
    obj.emit_text(json.dumps(res) + "\n")
    if matrix:
        path = Path(matrix)
        obj.check_overwrite(path)
        np.savetxt(path, np.exp(log_channel_of(mech)), delimiter=",", fmt="%.17g")


if __name__ == "__main__":
    main()
