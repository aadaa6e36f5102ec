"""Structure and decision metrics: SHD, skeleton F1, weighted accuracy,
Clopper-Pearson intervals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
from scipy import special

from .graphs import Dag, GraphError, MixedGraph, cpdag_of

Graph = Union[MixedGraph, Dag]


def _as_mixed(g: Graph, target: str) -> MixedGraph:
    if isinstance(g, Dag):
        return cpdag_of(g) if target == "cpdag" else g.to_mixed()
    return g


def _aligned(truth: Graph, estimate: Graph, target: str):
    t = _as_mixed(truth, target)
    e = _as_mixed(estimate, target)
    if set(t.names) != set(e.names) or len(t.names) != len(e.names):
        raise GraphError("graphs have different node sets")
    if t.names != e.names:
        idx = {v: i for i, v in enumerate(e.names)}
        e = e.relabel([idx[v] for v in t.names])
    return t, e


def shd(truth: Graph, estimate: Graph, target: str = "cpdag") -> int:
    """Structural Hamming distance.

    One point per unordered pair whose edge is missing, extra, reversed, or
    directed in one graph and undirected in the other. Any :class:`Dag`
    argument is first converted to its CPDAG unless ``target='dag'``, so an
    estimate in the right Markov equivalence class scores 0.
    """
    t, e = _aligned(truth, estimate, target)
    ta, ea = t.amat, e.amat
    differs = (ta != ea) | (ta.T != ea.T)
    return int(np.triu(differs, 1).sum())


@dataclass(frozen=True)
class F1Result:
    precision: float
    recall: float
    f1: float


def skeleton_f1(truth: Graph, estimate: Graph) -> F1Result:
    t, e = _aligned(truth, estimate, "dag")
    ts, es = t.skeleton(), e.skeleton()
    tp = len(ts & es)
    precision = tp / len(es) if es else 0.0
    recall = tp / len(ts) if ts else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return F1Result(precision, recall, f1)


@dataclass(frozen=True)
class PairOutcome:
    pair_id: str
    weight: float
    correct: bool


def weighted_accuracy(outcomes: Iterable[PairOutcome]) -> float:
    outcomes = list(outcomes)
    w = np.array([o.weight for o in outcomes], dtype=float)
    if not np.isfinite(w).all() or (w < 0).any():
        raise ValueError("weights must be finite and nonnegative")
    if w.sum() <= 0:
        raise ValueError("need at least one positive weight")
    c = np.array([o.correct for o in outcomes], dtype=float)
    return float(w @ c / w.sum())


def _beta_quantile(q: float, a: float, b: float, tol: float = 1e-10) -> float:
    """Solve I_x(a, b) = q for x by bisection."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if special.betainc(a, b, mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def clopper_pearson(successes: int, trials: int, conf: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval for ``successes / trials``."""
    s, n = successes, trials
    if n < 1 or not 0 <= s <= n:
        raise ValueError("need 0 <= successes <= trials and trials >= 1")
    if not 0 < conf < 1:
        raise ValueError("conf must lie in (0, 1)")
    alpha = 1 - conf
    lo = 0.0 if s == 0 else _beta_quantile(alpha / 2, s, n - s + 1)
    hi = 1.0 if s == n else _beta_quantile(1 - alpha / 2, s + 1, n - s)
    return lo, hi
