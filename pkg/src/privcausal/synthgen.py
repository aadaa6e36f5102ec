"""Random DAGs and linear-Gaussian structural equation models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import ContinuousTable, Dataset, discretize
from .graphs import Dag
from .rng import RngSeed, as_generator

BENCHMARKS = {
    # name: (nodes, bins, rows)
    "synth10": (10, 10, 5000),
    "synth5": (5, 5, 50000),
}


def random_dag(nodes: int, max_parents: float = math.inf, edge_prob: float = 0.4, rng=None, names=None) -> Dag:
    """Random DAG over a uniformly random node order.

    Each node considers the earlier nodes in random order and keeps each as a
    parent with probability ``edge_prob``, stopping at ``max_parents``.
    """
    if nodes < 1:
        raise ValueError("nodes must be >= 1")
    if not 0 <= edge_prob <= 1:
        raise ValueError("edge_prob must lie in [0, 1]")
    g = as_generator(rng)
    order = g.permutation(nodes)
    edges = []
    for pos in range(1, nodes):
        child = int(order[pos])
        n_par = 0
        for parent in g.permutation(order[:pos]):
            if n_par >= max_parents:
                break
            if g.random() < edge_prob:
                edges.append((int(parent), child))
                n_par += 1
    names = names or [f"X{i}" for i in range(nodes)]
    return Dag(tuple(names), tuple(edges))


@dataclass(frozen=True)
class LinearSem:
    dag: Dag
    weights: dict  # (from, to) -> weight
    noise_std: tuple

    def __post_init__(self):
        if set(self.weights) != set(self.dag.edges):
            raise ValueError("need exactly one weight per edge")
        if len(self.noise_std) != self.dag.n or min(self.noise_std) <= 0:
            raise ValueError("need a positive noise std per node")


def random_sem(dag: Dag, rng=None, w_lo: float = 0.5, w_hi: float = 2.0, noise_std: float = 1.0) -> LinearSem:
    """Weights uniform on +-[w_lo, w_hi] with a fair random sign."""
    g = as_generator(rng)
    weights = {}
    for e in dag.edges:
        weights[e] = float(g.uniform(w_lo, w_hi) * (1 if g.random() < 0.5 else -1))
    return LinearSem(dag, weights, (noise_std,) * dag.n)


def sample_sem(sem: LinearSem, n: int, rng=None) -> ContinuousTable:
    """IID rows; each node is its weighted parents plus Gaussian noise."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g = as_generator(rng)
    d = sem.dag.n
    noise = g.standard_normal((n, d)) * np.asarray(sem.noise_std)
    x = np.zeros((n, d))
    for v in sem.dag.order:
        x[:, v] = noise[:, v]
        for u in sem.dag.parents(v):
            x[:, v] += sem.weights[(u, v)] * x[:, u]
    return ContinuousTable(sem.dag.names, x)


def make_benchmark(name: str, rng, edge_prob: float = 0.4, max_parents: int = 3) -> tuple[Dataset, Dag]:
    """Discretized synthetic benchmark and its ground-truth DAG.

    With an :class:`RngSeed`, the graph, weights and samples use child
    streams 0, 1 and 2.
    """
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}")
    nodes, bins, rows = BENCHMARKS[name]
    if isinstance(rng, RngSeed):
        g_dag, g_sem, g_data = (rng.child(i).generator() for i in range(3))
    else:
        g_dag = g_sem = g_data = as_generator(rng)
    dag = random_dag(nodes, max_parents, edge_prob, g_dag)
    sem = random_sem(dag, g_sem)
    table = sample_sem(sem, rows, g_data)
    return discretize(table, bins), dag


def cubic_pairs(n_pairs: int = 50, n: int = 500, rng=None, noise_std: float = 1.0):
    """Cause-effect pairs ``effect = cause**3 + noise`` with ``cause ~ U(-2, 2)``.

    The cause lands in the first column for a random half of the pairs.
    Returns :class:`~privcausal.bench.pairs.CausePair` objects with weight 1.
    """
    from .bench.pairs import CausePair

    g = as_generator(rng)
    out = []
    for p in range(n_pairs):
        cause = g.uniform(-2.0, 2.0, n)
        effect = cause**3 + g.normal(0.0, noise_std, n)
        if g.random() < 0.5:
            out.append(CausePair(f"cubic{p:03d}", cause, effect, 1.0, "x_to_y"))
        else:
            out.append(CausePair(f"cubic{p:03d}", effect, cause, 1.0, "y_to_x"))
    return out
