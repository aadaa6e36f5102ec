"""PC-stable: level-wise skeleton search, v-structures, Meek closure."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional, Sequence

import networkx as nx
import numpy as np

from ..data import Dataset
from ..graphs import Dag, MixedGraph, meek_closure
from .citests import CiResult, CiTestConfig, CiTester

CiFunc = Callable[[int, int, Sequence[int]], CiResult]


@dataclass
class Skeleton:
    adj: np.ndarray  # symmetric bool
    sepsets: dict = field(default_factory=dict)  # frozenset{i, j} -> tuple cond
    pvalues: dict = field(default_factory=dict)  # frozenset{i, j} -> p of the deciding / largest test


def pc_skeleton(n_vars: int, ci: CiFunc, max_cond: Optional[int] = None) -> Skeleton:
    """Adjacency search; removals within a level use that level's starting adjacencies."""
    adj = ~np.eye(n_vars, dtype=bool)
    sk = Skeleton(adj)
    level = 0
    while max_cond is None or level <= max_cond:
        snapshot = [np.flatnonzero(adj[v]).tolist() for v in range(n_vars)]
        if all(len(nb) - 1 < level for nb in snapshot):
            break
        for i in range(n_vars):
            for j in snapshot[i]:
                if not adj[i, j]:
                    continue
                key = frozenset((i, j))
                for cond in combinations([v for v in snapshot[i] if v != j], level):
                    res = ci(i, j, cond)
                    sk.pvalues[key] = max(sk.pvalues.get(key, 0.0), res.p_value)
                    if res.independent:
                        adj[i, j] = adj[j, i] = False
                        sk.sepsets[key] = tuple(cond)
                        sk.pvalues[key] = res.p_value
                        break
        level += 1
    return sk


def orient(sk: Skeleton) -> np.ndarray:
    """Orient unshielded colliders, first come first served, then close under Meek rules."""
    adj = sk.adj
    n = adj.shape[0]
    a = adj.astype(np.int8)
    for k in range(n):
        nb = np.flatnonzero(adj[k]).tolist()
        for i, j in combinations(nb, 2):
            if adj[i, j] or k in sk.sepsets.get(frozenset((i, j)), ()):
                continue
            # skip if it would reverse an arrow already placed
            if a[i, k] == 0 or a[j, k] == 0:
                continue
            a[k, i] = 0
            a[k, j] = 0
    return meek_closure(a)


def _name_order(names: Sequence[str]) -> list[int]:
    return sorted(range(len(names)), key=lambda v: names[v])


def pc_from_ci(names: Sequence[str], ci: CiFunc, max_cond: Optional[int] = None) -> MixedGraph:
    """PC on an arbitrary CI oracle.

    Variables are processed in name order, so the result does not depend on
    the column order of the input.
    """
    perm = _name_order(names)
    sk = pc_skeleton(len(names), lambda i, j, c: ci(perm[i], perm[j], [perm[v] for v in c]), max_cond)
    g = MixedGraph(tuple(names[p] for p in perm), orient(sk))
    return g.relabel(np.argsort(perm))


def pc(ds: Dataset, cfg: CiTestConfig = CiTestConfig(), max_cond: Optional[int] = None) -> MixedGraph:
    if ds.domain.d < 2:
        raise ValueError("PC needs at least two variables")
    return pc_from_ci(ds.names, CiTester(ds, cfg), max_cond)


def dsep_oracle(dag: Dag) -> CiFunc:
    g = nx.DiGraph()
    g.add_nodes_from(range(dag.n))
    g.add_edges_from(dag.edges)

    def ci(i, j, cond):
        sep = nx.is_d_separator(g, {i}, {j}, set(cond))
        return CiResult(sep, 1.0 if sep else 0.0, 0.0)

    return ci


def pc_with_oracle(dag: Dag) -> MixedGraph:
    return pc_from_ci(dag.names, dsep_oracle(dag))
