"""Greedy BIC search over DAGs for discrete data."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..data import Dataset
from ..graphs import Dag


class BicScore:
    """Multinomial log-likelihood minus ``penalty_discount * log(n)/2 * #params`` per node."""

    def __init__(self, ds: Dataset, penalty_discount: float = 1.0):
        if penalty_discount <= 0:
            raise ValueError("penalty_discount must be > 0")
        self.ds = ds
        self.penalty = penalty_discount * math.log(ds.n) / 2.0
        self._cache: dict = {}

    def local(self, v: int, parents: frozenset) -> float:
        key = (v, parents)
        if key not in self._cache:
            self._cache[key] = self._compute(v, sorted(parents))
        return self._cache[key]

    def _compute(self, v, parents):
        rows, dims = self.ds.rows, self.ds.domain.dims
        kv = dims[v]
        if parents:
            _, cfg = np.unique(rows[:, parents], axis=0, return_inverse=True)
            cfg = cfg.reshape(-1)
        else:
            cfg = np.zeros(self.ds.n, dtype=np.int64)
        joint = np.bincount(cfg * kv + rows[:, v])
        joint = joint[joint > 0]
        marg = np.bincount(cfg)
        marg = marg[marg > 0]
        ll = float(np.sum(joint * np.log(joint)) - np.sum(marg * np.log(marg)))
        q = math.prod(dims[p] for p in parents)
        return ll - self.penalty * (kv - 1) * q


def _reaches(adj: np.ndarray, src: int, dst: int) -> bool:
    seen = {src}
    stack = [src]
    while stack:
        u = stack.pop()
        if u == dst:
            return True
        for w in np.flatnonzero(adj[u]).tolist():
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def bic_hill_climb(
    ds: Dataset, penalty_discount: float = 1.0, max_parents: Optional[int] = None, max_steps: int = 10_000
) -> Dag:
    """Add / delete / reverse single edges while the BIC improves.

    Each step takes the best-improving move; ties go to the lexicographically
    smallest ``(from, to, move)``.
    """
    score = BicScore(ds, penalty_discount)
    d = ds.domain.d
    adj = np.zeros((d, d), dtype=bool)
    parents = [frozenset() for _ in range(d)]
    for _ in range(max_steps):
        best = None
        for i in range(d):
            for j in range(d):
                if i == j:
                    continue
                if adj[i, j]:
                    # delete i -> j
                    delta = score.local(j, parents[j] - {i}) - score.local(j, parents[j])
                    moves = [(delta, (i, j, 1))]
                    # reverse i -> j
                    adj[i, j] = False
                    ok = not _reaches(adj, i, j) and (max_parents is None or len(parents[i]) < max_parents)
                    adj[i, j] = True
                    if ok:
                        delta = (
                            score.local(j, parents[j] - {i})
                            - score.local(j, parents[j])
                            + score.local(i, parents[i] | {j})
                            - score.local(i, parents[i])
                        )
                        moves.append((delta, (i, j, 2)))
                elif not adj[j, i]:
                    if max_parents is not None and len(parents[j]) >= max_parents:
                        continue
                    if _reaches(adj, j, i):
                        continue
                    delta = score.local(j, parents[j] | {i}) - score.local(j, parents[j])
                    moves = [(delta, (i, j, 0))]
                else:
                    continue
                for delta, mv in moves:
                    if delta > 1e-9 and (best is None or delta > best[0] + 1e-12):
                        best = (delta, mv)
        if best is None:
            break
        i, j, kind = best[1]
        if kind == 0:
            adj[i, j] = True
            parents[j] = parents[j] | {i}
        elif kind == 1:
            adj[i, j] = False
            parents[j] = parents[j] - {i}
        else:
            adj[i, j] = False
            parents[j] = parents[j] - {i}
            adj[j, i] = True
            parents[i] = parents[i] | {j}
    edges = tuple(zip(*np.nonzero(adj)))
    return Dag(ds.names, tuple((int(u), int(v)) for u, v in edges))
