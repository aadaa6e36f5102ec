from itertools import permutations

import numpy as np
import pytest

from privcausal.data import Dataset, Domain
from privcausal.discovery.citests import CiTestConfig, CiTester
from privcausal.discovery.pc import pc, pc_skeleton, pc_with_oracle
from privcausal.graphs import Dag, MixedGraph, cpdag_of
from privcausal.rng import RngSeed
from privcausal.synthgen import make_benchmark, random_dag


def _vstructs(n, edges):
    pa = {v: {u for u, w in edges if w == v} for v in range(n)}
    adj = {frozenset(e) for e in edges}
    return {
        (min(a, b), max(a, b), c)
        for c in range(n)
        for a in pa[c]
        for b in pa[c]
        if a < b and frozenset((a, b)) not in adj
    }


def brute_force_cpdag(dag: Dag) -> MixedGraph:
    """Orient the skeleton along every node ordering, keep the orientations
    with the same v-structures (the equivalence class), and direct exactly
    the edges on which all of them agree."""
    n = dag.n
    skel = [tuple(sorted(e)) for e in dag.edges]
    target = _vstructs(n, dag.edges)
    seen = set()
    for perm in permutations(range(n)):
        pos = {v: i for i, v in enumerate(perm)}
        orient = tuple((a, b) if pos[a] < pos[b] else (b, a) for a, b in skel)
        if orient not in seen and _vstructs(n, orient) == target:
            seen.add(orient)
    directed, undirected = [], []
    for k, (a, b) in enumerate(skel):
        dirs = {o[k] for o in seen}
        if len(dirs) == 1:
            directed.append(next(iter(dirs)))
        else:
            undirected.append((a, b))
    return MixedGraph.from_edges(dag.names, directed, undirected)


def test_chain_is_undirected():
    dag = Dag(("X", "Y", "Z"), ((0, 1), (1, 2)))
    g = pc_with_oracle(dag)
    assert g.directed_edges() == []
    assert g.undirected_edges() == [(0, 1), (1, 2)]


def test_collider_is_oriented():
    dag = Dag(("X", "Y", "Z"), ((0, 2), (1, 2)))
    g = pc_with_oracle(dag)
    assert g.directed_edges() == [(0, 2), (1, 2)]
    assert not g.adjacent(0, 1)


def test_cpdag_of_examples():
    assert cpdag_of(Dag(("a", "b", "c"), ())).skeleton() == set()
    assert cpdag_of(Dag(("a", "b", "c"), ((0, 1), (1, 2)))).directed_edges() == []
    assert cpdag_of(Dag(("a", "b", "c"), ((0, 2), (1, 2)))).directed_edges() == [(0, 2), (1, 2)]


def test_brute_force_oracle_self_check():
    # a -> c <- b, c -> d: v-structure forces c -> d by R1
    dag = Dag(tuple("abcd"), ((0, 2), (1, 2), (2, 3)))
    assert brute_force_cpdag(dag).directed_edges() == [(0, 2), (1, 2), (2, 3)]


def test_pc_oracle_matches_brute_force_random_dags():
    g = np.random.default_rng(2024)
    for _ in range(100):
        n = int(g.integers(2, 7))
        dag = random_dag(n, edge_prob=float(g.uniform(0.2, 0.8)), rng=g)
        expected = brute_force_cpdag(dag)
        assert np.array_equal(pc_with_oracle(dag).amat, expected.amat), dag
        assert np.array_equal(cpdag_of(dag).amat, expected.amat), dag


def test_pc_requires_two_variables():
    ds = Dataset(Domain((3,), ("a",)), np.zeros((5, 1), dtype=int))
    with pytest.raises(ValueError):
        pc(ds)


@pytest.fixture(scope="module")
def synth5():
    ds, _ = make_benchmark("synth5", RngSeed(11, (0,)))
    return ds.select(range(5))


@pytest.mark.parametrize("test", ["fisher_z", "chi_square"])
def test_column_order_invariance(synth5, test):
    cfg = CiTestConfig(test, 0.05)
    base = pc(synth5, cfg)
    for perm in ([4, 3, 2, 1, 0], [2, 0, 4, 1, 3]):
        g = pc(synth5.select(perm), cfg)
        assert np.array_equal(g.amat, base.relabel(perm).amat)


def test_alpha_pvalue_bookkeeping(synth5):
    # an edge removed at alpha=0.1 had a test with p >= 0.1; it stays removed
    # for every alpha up to that p-value
    loose = pc_skeleton(5, CiTester(synth5, CiTestConfig("fisher_z", 0.1)))
    for key, p in loose.pvalues.items():
        i, j = tuple(key)
        if loose.adj[i, j]:
            continue
        assert p >= 0.1
        for alpha in (0.1, (0.1 + p) / 2, p):
            if alpha >= 1:
                continue
            sk = pc_skeleton(5, CiTester(synth5, CiTestConfig("fisher_z", alpha)))
            assert not sk.adj[i, j]


def test_marginal_removals_monotone_in_alpha(synth5):
    # level-0 p-values do not depend on alpha: a larger alpha removes a subset
    strict = pc_skeleton(5, CiTester(synth5, CiTestConfig("fisher_z", 0.001)), max_cond=0)
    loose = pc_skeleton(5, CiTester(synth5, CiTestConfig("fisher_z", 0.1)), max_cond=0)
    assert (strict.adj <= loose.adj).all()
