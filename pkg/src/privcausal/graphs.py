"""Graph types: DAGs and mixed (partially directed) graphs.

Mixed graphs use the mark-matrix convention: ``amat[i, j] == 1`` puts an
arrow mark from ``i`` toward ``j``. ``i -> j`` is ``amat[i, j] = 1,
amat[j, i] = 0``; ``i - j`` (undirected) has both marks set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class MixedGraph:
    names: tuple[str, ...]
    amat: np.ndarray

    def __post_init__(self):
        a = np.array(self.amat, dtype=np.int8)
        n = len(self.names)
        if a.shape != (n, n):
            raise GraphError(f"adjacency shape {a.shape} does not match {n} nodes")
        if np.any(np.diag(a)):
            raise GraphError("self-loops are not allowed")
        if not np.isin(a, (0, 1)).all():
            raise GraphError("adjacency entries must be 0/1")
        a.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "amat", a)

    @classmethod
    def from_edges(cls, names: Sequence[str], directed: Iterable = (), undirected: Iterable = ()):
        names = tuple(names)
        idx = {v: i for i, v in enumerate(names)}
        a = np.zeros((len(names), len(names)), dtype=np.int8)
        for u, v in directed:
            i, j = idx.get(u, u), idx.get(v, v)
            if a[i, j] or a[j, i]:
                raise GraphError(f"more than one edge between {names[i]} and {names[j]}")
            a[i, j] = 1
        for u, v in undirected:
            i, j = idx.get(u, u), idx.get(v, v)
            if a[i, j] or a[j, i]:
                raise GraphError(f"more than one edge between {names[i]} and {names[j]}")
            a[i, j] = a[j, i] = 1
        return cls(names, a)

    @property
    def n(self) -> int:
        return len(self.names)

    def directed_edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero((self.amat == 1) & (self.amat.T == 0))
        return sorted(zip(i.tolist(), j.tolist()))

    def undirected_edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu((self.amat == 1) & (self.amat.T == 1)))
        return sorted(zip(i.tolist(), j.tolist()))

    def skeleton(self) -> set[frozenset]:
        i, j = np.nonzero(np.triu(self.amat | self.amat.T))
        return {frozenset(p) for p in zip(i.tolist(), j.tolist())}

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.amat[i, j] or self.amat[j, i])

    def relabel(self, perm: Sequence[int]) -> "MixedGraph":
        """Graph on ``[names[p] for p in perm]``."""
        perm = list(perm)
        return MixedGraph(tuple(self.names[p] for p in perm), self.amat[np.ix_(perm, perm)])

    def to_dict(self) -> dict:
        edges = [
            {"from": self.names[i], "to": self.names[j], "directed": True}
            for i, j in self.directed_edges()
        ]
        edges += [
            {"from": self.names[i], "to": self.names[j], "directed": False}
            for i, j in self.undirected_edges()
        ]
        return {"nodes": list(self.names), "edges": edges}

    @classmethod
    def from_dict(cls, obj: dict) -> "MixedGraph":
        directed = [(e["from"], e["to"]) for e in obj["edges"] if e.get("directed", True)]
        undirected = [(e["from"], e["to"]) for e in obj["edges"] if not e.get("directed", True)]
        names = obj["nodes"]
        unknown = {v for e in directed + undirected for v in e} - set(names)
        if unknown:
            raise GraphError(f"edges reference unknown nodes {sorted(unknown)}")
        return cls.from_edges(names, directed, undirected)

    def is_dag(self) -> bool:
        return not self.undirected_edges() and _topological_order(self.amat) is not None


def _topological_order(amat: np.ndarray):
    a = np.array(amat, dtype=bool)
    indeg = a.sum(axis=0)
    ready = sorted(np.flatnonzero(indeg == 0).tolist())
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in np.flatnonzero(a[v]).tolist():
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
        ready.sort()
    return order if len(order) == a.shape[0] else None


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph on named nodes; ``edges`` are index pairs (from, to)."""

    names: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple(sorted({(int(u), int(v)) for u, v in self.edges}))
        n = len(self.names)
        for u, v in edges:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"invalid edge ({u}, {v})")
            if (v, u) in edges:
                raise GraphError(f"two-cycle between {u} and {v}")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "edges", edges)
        if _topological_order(self.amat) is None:
            raise GraphError("graph has a cycle")

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def amat(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for u, v in self.edges:
            a[u, v] = 1
        return a

    @property
    def order(self) -> list[int]:
        return _topological_order(self.amat)

    def parents(self, v: int) -> list[int]:
        return [u for u, w in self.edges if w == v]

    def to_mixed(self) -> MixedGraph:
        return MixedGraph(self.names, self.amat)

    @classmethod
    def from_mixed(cls, g: MixedGraph) -> "Dag":
        if g.undirected_edges():
            raise GraphError("graph has undirected edges")
        return cls(g.names, tuple(g.directed_edges()))


def meek_closure(amat: np.ndarray) -> np.ndarray:
    """Apply Meek's orientation rules R1-R4 until nothing changes."""
    a = np.array(amat, dtype=np.int8)
    n = a.shape[0]

    def und(i, j):
        return a[i, j] == 1 and a[j, i] == 1

    def dirc(i, j):
        return a[i, j] == 1 and a[j, i] == 0

    def adj(i, j):
        return a[i, j] == 1 or a[j, i] == 1

    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if i == j or not und(i, j):
                    continue
                # R1: k -> i - j, k and j non-adjacent
                r1 = any(dirc(k, i) and not adj(k, j) for k in range(n) if k != j)
                # R2: i -> k -> j with i - j
                r2 = any(dirc(i, k) and dirc(k, j) for k in range(n))
                # R3: i - k -> j, i - l -> j, k and l non-adjacent
                mids = [k for k in range(n) if und(i, k) and dirc(k, j)]
                r3 = any(
                    not adj(k, l) for x, k in enumerate(mids) for l in mids[x + 1 :]
                )
                # R4: i - k -> l -> j, i adjacent to l, k and j non-adjacent
                r4 = any(
                    und(i, k) and dirc(k, l) and dirc(l, j) and adj(i, l) and not adj(k, j)
                    for k in range(n)
                    for l in range(n)
                    if len({i, j, k, l}) == 4
                )
                if r1 or r2 or r3 or r4:
                    a[j, i] = 0
                    changed = True
    return a


def cpdag_of(dag: Dag) -> MixedGraph:
    """Pattern of ``dag``: v-structure edges directed, then Meek closure."""
    d = dag.amat
    skel = (d | d.T).astype(np.int8)
    a = skel.copy()
    for b in range(dag.n):
        pa = np.flatnonzero(d[:, b]).tolist()
        for x, u in enumerate(pa):
            for w in pa[x + 1 :]:
                if not skel[u, w]:
                    a[b, u] = 0
                    a[b, w] = 0
    return MixedGraph(dag.names, meek_closure(a))


def write_graph(g: MixedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(g.to_dict(), fh, indent=1)
        fh.write("\n")


def read_graph(path) -> MixedGraph:
    with open(path, encoding="utf-8") as fh:
        return MixedGraph.from_dict(json.load(fh))
