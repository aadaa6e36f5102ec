import math

import numpy as np
import pytest

from privcausal.graphs import Dag
from privcausal.rng import RngSeed
from privcausal.synthgen import (
    LinearSem,
    cubic_pairs,
    make_benchmark,
    random_dag,
    random_sem,
    sample_sem,
)


def test_random_dag_extremes():
    assert random_dag(5, edge_prob=0.0, rng=0).edges == ()
    assert len(random_dag(3, edge_prob=1.0, rng=0).edges) == 3
    assert len(random_dag(6, edge_prob=1.0, rng=1).edges) == 15


def test_random_dag_in_degree_bound():
    g = np.random.default_rng(0)
    for _ in range(1000):
        dag = random_dag(10, max_parents=3, edge_prob=0.6, rng=g)
        assert max((len(dag.parents(v)) for v in range(10)), default=0) <= 3


def test_random_dag_acyclic_many():
    g = np.random.default_rng(1)
    for _ in range(10_000):
        n = int(g.integers(1, 9))
        dag = random_dag(n, max_parents=int(g.integers(1, 5)), edge_prob=float(g.random()), rng=g)
        assert dag.to_mixed().is_dag()
        pos = {v: i for i, v in enumerate(dag.order)}
        assert all(pos[a] < pos[b] for a, b in dag.edges)


def test_random_dag_validation():
    with pytest.raises(ValueError):
        random_dag(0)
    with pytest.raises(ValueError):
        random_dag(3, edge_prob=1.5)


def test_zero_weights_independent():
    dag = Dag(("a", "b", "c"), ((0, 1), (1, 2)))
    sem = LinearSem(dag, {(0, 1): 0.0, (1, 2): 0.0}, (1.0, 1.0, 1.0))
    x = sample_sem(sem, 10_000, 0).values
    c = np.corrcoef(x.T)
    assert np.all(np.abs(c[np.triu_indices(3, 1)]) < 0.05)


def test_chain_variance():
    dag = Dag(("x", "y"), ((0, 1),))
    sem = LinearSem(dag, {(0, 1): 1.0}, (1.0, 1.0))
    y = sample_sem(sem, 10_000, 3).column("y")
    assert abs(y.var() - 2.0) < 0.1


def test_single_row():
    dag = random_dag(4, rng=0)
    t = sample_sem(random_sem(dag, 0), 1, 0)
    assert t.n == 1 and np.isfinite(t.values).all()


def test_sem_weights_in_range():
    dag = random_dag(8, edge_prob=0.7, rng=2)
    sem = random_sem(dag, 3)
    assert all(0.5 <= abs(w) <= 2.0 for w in sem.weights.values())
    with pytest.raises(ValueError):
        LinearSem(dag, {}, (1.0,) * 8)


def test_collider_marginal_independence():
    dag = Dag(("x", "y", "z"), ((0, 2), (1, 2)))
    sem = LinearSem(dag, {(0, 2): 1.0, (1, 2): 1.0}, (1.0, 1.0, 1.0))
    v = sample_sem(sem, 10_000, 4).values
    assert abs(np.corrcoef(v[:, 0], v[:, 1])[0, 1]) < 0.05
    prec = np.linalg.inv(np.corrcoef(v.T))
    partial = -prec[0, 1] / math.sqrt(prec[0, 0] * prec[1, 1])
    assert abs(partial) > 0.3


@pytest.mark.parametrize("name,d,k,n", [("synth10", 10, 10, 5000), ("synth5", 5, 5, 50000)])
def test_benchmarks_shape(name, d, k, n):
    ds, dag = make_benchmark(name, RngSeed(1))
    assert ds.domain.dims == (k,) * d
    assert ds.n == n
    assert dag.n == d
    assert max(len(dag.parents(v)) for v in range(d)) <= 3


def test_benchmark_deterministic():
    a, da = make_benchmark("synth5", RngSeed(8, (0, 0)))
    b, db = make_benchmark("synth5", RngSeed(8, (0, 0)))
    assert np.array_equal(a.rows, b.rows) and da == db
    with pytest.raises(ValueError):
        make_benchmark("synth7", RngSeed(1))


def test_cubic_pairs():
    pairs = cubic_pairs(20, 300, 0)
    assert len(pairs) == 20
    dirs = {p.truth_direction for p in pairs}
    assert dirs == {"x_to_y", "y_to_x"}
    for p in pairs:
        cause, effect = (p.x, p.y) if p.truth_direction == "x_to_y" else (p.y, p.x)
        assert np.abs(cause).max() <= 2.0
        assert np.corrcoef(cause**3, effect)[0, 1] > 0.8
