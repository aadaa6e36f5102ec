"""The run matrix: dataset x mechanism x level x algorithm x repetition.

Stream layout under the master seed:

* ``0/<dataset>``: synthetic data generation;
* ``1/<dataset>/<mechanism>/<level>/<rep>``: privatization of one cell
  (pair collections use one child per pair).

Every record carries its stream path, so any privatized input can be rebuilt
with :func:`replay_privatized`.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from ..data import read_dataset
from ..discovery.citests import CiTestConfig
from ..discovery.hillclimb import bic_hill_climb
from ..discovery.pairwise import PAIRWISE, X_TO_Y
from ..discovery.pc import pc
from ..errors import DataError, InfeasibleError
from ..graphs import read_graph
from ..mechanisms import privatize_dataset
from ..metrics import PairOutcome, clopper_pearson, shd, skeleton_f1, weighted_accuracy
from ..rng import RngSeed
from ..synthgen import cubic_pairs, make_benchmark
from ..tuning import matched_specs
from .config import AlgorithmConfig, ExperimentConfig, MechanismConfig
from .pairs import ingest_pairs_dir

log = logging.getLogger(__name__)

BASELINE = "no_noise"
STRUCTURE_METRICS = ("shd", "f1", "precision", "recall")
PAIRWISE_METRICS = ("weighted_accuracy", "ci_lo", "ci_hi", "ci80_lo", "ci80_hi")


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    mechanism: str
    level: Optional[float]
    algorithm: str
    repetition: Optional[int]
    seed_path: str
    status: str  # "ok", "skipped" or "failed"
    reason: str = ""
    metrics: dict = field(default_factory=dict)
    wall_time: float = 0.0
    # canonical position in the grid; baseline cells use -1 for mechanism and level
    key: tuple = ()


# -- data --------------------------------------------------------------------


@lru_cache(maxsize=8)
def load_dataset(cfg: ExperimentConfig, di: int):
    """``("graph", Dataset, truth)`` or ``("pairs", [CausePair], None)``."""
    d = cfg.datasets[di]
    stream = RngSeed(cfg.seed, (0, di))
    if d.synth is not None:
        ds, dag = make_benchmark(d.synth, stream)
        return "graph", ds, dag
    if d.path is not None:
        ds = read_dataset(cfg.resolve(d.path))
        truth = read_graph(cfg.resolve(d.truth))
        if set(truth.names) != set(ds.names):
            raise DataError(f"dataset {d.name!r}: truth graph nodes differ from columns")
        return "graph", ds, truth
    if d.pairs is not None:
        return "pairs", ingest_pairs_dir(cfg.resolve(d.pairs)), None
    n_pairs, n = d.cubic_pairs
    return "pairs", cubic_pairs(n_pairs, n, stream), None


def _spec(mcfg: MechanismConfig, level: float, domain):
    specs, errors = matched_specs(
        level, domain, [mcfg.kind], cwise_split=mcfg.cwise_split, norm=mcfg.norm, mode=mcfg.mode
    )
    if errors:
        raise InfeasibleError(next(iter(errors.values())))
    return specs[0]


def privatize_cell(cfg: ExperimentConfig, di: int, mi: int, li: int, rep: int):
    """Privatized input of one cell; raises InfeasibleError if the level cannot be met."""
    kind, data, truth = load_dataset(cfg, di)
    mcfg, level = cfg.mechanisms[mi], cfg.levels[li]
    stream = RngSeed(cfg.seed, (1, di, mi, li, rep))
    if kind == "graph":
        return privatize_dataset(data, _spec(mcfg, level, data.domain), stream)
    out = []
    for p, pair in enumerate(data):
        ds = pair.discretized()
        try:
            spec = _spec(mcfg, level, ds.domain)
        except InfeasibleError as exc:
            raise InfeasibleError(f"pair {pair.pair_id}: {exc}") from None
        out.append(privatize_dataset(ds, spec, stream.child(p)))
    return out


def replay_privatized(cfg: ExperimentConfig, record: RunRecord):
    """Rebuild the privatized input a record was computed on from its seed path."""
    tag, di, mi, li, rep = RngSeed.parse(cfg.seed, record.seed_path).path
    if tag != 1:
        raise ValueError("record has no privatization stream")
    return privatize_cell(cfg, di, mi, li, rep)


# -- algorithms ----------------------------------------------------------------


def _run_structure(algo: AlgorithmConfig, ds, truth, shd_target: str) -> dict:
    if algo.name == "pc":
        est = pc(ds, CiTestConfig(algo.test, algo.alpha), algo.max_cond)
    else:
        est = bic_hill_climb(ds, algo.penalty_discount, algo.max_parents)
    f1 = skeleton_f1(truth, est)
    return {
        "shd": shd(truth, est, shd_target),
        "f1": f1.f1,
        "precision": f1.precision,
        "recall": f1.recall,
    }


def _run_pairwise(algo: AlgorithmConfig, pairs, datasets) -> dict:
    decide = PAIRWISE[algo.name]
    outcomes = []
    for pair, ds in zip(pairs, datasets):
        try:
            direction = decide(ds.column(0), ds.column(1)).direction
        except DataError:
            # degenerate input still has to be decided
            direction = X_TO_Y
        outcomes.append(PairOutcome(pair.pair_id, pair.weight, direction == pair.truth_direction))
    acc = weighted_accuracy(outcomes)
    n = len(outcomes)
    s = round(acc * n)
    lo, hi = clopper_pearson(s, n, 0.95)
    lo80, hi80 = clopper_pearson(s, n, 0.80)
    return {"weighted_accuracy": acc, "ci_lo": lo, "ci_hi": hi, "ci80_lo": lo80, "ci80_hi": hi80}


def _evaluate(cfg, algo, kind, data, truth, privatized) -> dict:
    if kind == "graph":
        return _run_structure(algo, privatized, truth, cfg.shd_target)
    return _run_pairwise(algo, data, privatized)


def _algorithms_for(cfg: ExperimentConfig, kind: str):
    want_pairwise = kind == "pairs"
    return [(ai, a) for ai, a in enumerate(cfg.algorithms) if a.is_pairwise == want_pairwise]


# -- cells ---------------------------------------------------------------------


def _baseline(cfg: ExperimentConfig, di: int) -> list:
    kind, data, truth = load_dataset(cfg, di)
    inputs = data if kind == "graph" else [p.discretized() for p in data]
    out = []
    for ai, algo in _algorithms_for(cfg, kind):
        base = dict(
            dataset=cfg.datasets[di].name,
            mechanism=BASELINE,
            level=None,
            algorithm=algo.label(),
            repetition=0,
            seed_path="",
            key=(di, -1, -1, ai, 0),
        )
        t0 = time.perf_counter()
        try:
            metrics = _evaluate(cfg, algo, kind, data, truth, inputs)
            out.append(RunRecord(status="ok", metrics=metrics, wall_time=time.perf_counter() - t0, **base))
        except (DataError, ValueError) as exc:
            out.append(RunRecord(status="failed", reason=str(exc), **base))
    return out


def _cell(cfg: ExperimentConfig, di: int, mi: int, li: int, rep: int) -> list:
    kind, data, truth = load_dataset(cfg, di)
    algos = _algorithms_for(cfg, kind)
    path = f"1/{di}/{mi}/{li}/{rep}"

    def base(ai, algo):
        return dict(
            dataset=cfg.datasets[di].name,
            mechanism=cfg.mechanisms[mi].label(),
            level=cfg.levels[li],
            algorithm=algo.label(),
            repetition=rep,
            seed_path=path,
            key=(di, mi, li, ai, rep),
        )

    t0 = time.perf_counter()
    try:
        privatized = privatize_cell(cfg, di, mi, li, rep)
    except (InfeasibleError, DataError) as exc:
        return [RunRecord(status="skipped", reason=str(exc), **base(ai, a)) for ai, a in algos]
    t_priv = time.perf_counter() - t0
    out = []
    for ai, algo in algos:
        t0 = time.perf_counter()
        try:
            metrics = _evaluate(cfg, algo, kind, data, truth, privatized)
        except (DataError, ValueError) as exc:
            out.append(RunRecord(status="failed", reason=str(exc), **base(ai, algo)))
            continue
        wall = t_priv + time.perf_counter() - t0
        out.append(RunRecord(status="ok", metrics=metrics, wall_time=wall, **base(ai, algo)))
    return out


def _tasks(cfg: ExperimentConfig):
    for di in range(len(cfg.datasets)):
        yield ("baseline", di)
        for mi in range(len(cfg.mechanisms)):
            for li in range(len(cfg.levels)):
                for rep in range(cfg.runs):
                    yield ("cell", di, mi, li, rep)


def _run_task(cfg: ExperimentConfig, task: tuple) -> list:
    if task[0] == "baseline":
        return _baseline(cfg, task[1])
    return _cell(cfg, *task[1:])


def _first_skip(records):
    # infeasibility does not depend on the repetition; keep one record per cell
    seen, out = set(), []
    for r in records:
        if r.status == "skipped":
            k = r.key[:4]
            if k in seen:
                continue
            seen.add(k)
            r = RunRecord(**{**r.__dict__, "repetition": None, "seed_path": "", "key": r.key[:4] + (-1,)})
        out.append(r)
    return out


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None, order=None) -> list:
    """Run every cell of the grid and return records in canonical order.

    ``order`` optionally permutes task execution (used to check that results
    do not depend on scheduling).
    """
    tasks = list(_tasks(cfg))
    if order is not None:
        tasks = [tasks[i] for i in order]
    workers = workers or cfg.workers
    for di in range(len(cfg.datasets)):
        load_dataset(cfg, di)  # surface data errors before any work
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(_run_task, [cfg] * len(tasks), tasks))
    else:
        chunks = [_run_task(cfg, t) for t in tasks]
    records = sorted((r for chunk in chunks for r in chunk), key=lambda r: r.key)
    return _first_skip(records)


def totally_failed_cells(records) -> list:
    """Cells (dataset, mechanism, level, algorithm) where no repetition succeeded
    and at least one failed."""
    cells = {}
    for r in records:
        if r.status == "skipped":
            continue
        k = (r.dataset, r.mechanism, r.level, r.algorithm)
        cells.setdefault(k, []).append(r.status == "ok")
    return [k for k, oks in cells.items() if not any(oks)]
