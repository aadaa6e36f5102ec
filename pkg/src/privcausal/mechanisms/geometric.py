"""Bounded geometric mechanism with a fixed mode probability.

For every input ``x`` the output law is ``P(y|x) = p_max * exp(-eps_x * d(x, y))``
over the bounded domain, where the per-input rate ``eps_x`` is found by
bisection so that the probabilities sum to one. The mass
``sum_y exp(-eps * d(x, y))`` falls monotonically from ``K`` (eps = 0) to 1
(eps -> inf), so a root exists iff ``1/K <= p_max <= 1``.

Under the Manhattan norm the mass factorizes over attributes,
``prod_i sum_{y_i} exp(-eps |y_i - x_i|)``, which is evaluated in
O(sum k_i) and scales to any domain size. Euclidean and Chebyshev norms
enumerate the domain and are capped at ``ENUMERATION_CAP`` points.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Sequence

import numpy as np

from ..data import Domain
from ..errors import DataError, InfeasibleError
from ..rng import as_generator

ENUMERATION_CAP = 10**7
CHANNEL_CAP = 4096

_CHUNK_CELLS = 4_000_000
_BISECT_STEPS = 200


class NormKind(str, Enum):
    MANHATTAN = "manhattan"
    EUCLIDEAN = "euclidean"
    CHEBYSHEV = "chebyshev"


class BoundingMode(str, Enum):
    CLIP = "clip"
    UNIFORM_REPLACE = "uniform_replace"
    RESAMPLE = "resample"


def distance(norm: NormKind, delta: np.ndarray) -> np.ndarray:
    """p-norm of integer offsets along the last axis."""
    norm = NormKind(norm)
    a = np.abs(delta)
    if norm is NormKind.MANHATTAN:
        return a.sum(axis=-1).astype(float)
    if norm is NormKind.EUCLIDEAN:
        return np.sqrt((a * a).sum(axis=-1))
    return a.max(axis=-1).astype(float)


def _distance_keys(norm: NormKind, delta: np.ndarray) -> np.ndarray:
    # integer key per offset; distance is a fixed function of the key
    norm = NormKind(norm)
    a = np.abs(delta)
    if norm is NormKind.MANHATTAN:
        return a.sum(axis=-1)
    if norm is NormKind.EUCLIDEAN:
        return (a * a).sum(axis=-1)
    return a.max(axis=-1)


def _key_values(norm: NormKind, keys: np.ndarray) -> np.ndarray:
    keys = keys.astype(float)
    return np.sqrt(keys) if norm is NormKind.EUCLIDEAN else keys


def _max_key(norm: NormKind, dims: Sequence[int]) -> int:
    if norm is NormKind.MANHATTAN:
        return sum(k - 1 for k in dims)
    if norm is NormKind.EUCLIDEAN:
        return sum((k - 1) ** 2 for k in dims)
    return max(k - 1 for k in dims)


# A distance profile is a list of factors (counts (n, M), values (M,)); the
# mass at rate eps is the product over factors of counts @ exp(-eps * values).


def _factorized_profile(dims: Sequence[int], xs: np.ndarray):
    factors = []
    for i, k in enumerate(dims):
        gaps = np.arange(k)
        left = xs[:, i : i + 1]
        right = k - 1 - left
        counts = (gaps[None, :] <= left).astype(float) + (gaps[None, :] <= right)
        counts[:, 0] = 1.0
        factors.append((counts, gaps.astype(float)))
    return factors


def _enumerated_profile(domain: Domain, norm: NormKind, xs: np.ndarray):
    grid = domain.grid()
    M = _max_key(norm, domain.dims) + 1
    keys = _distance_keys(norm, grid[None, :, :] - xs[:, None, :])
    n = xs.shape[0]
    flat = (np.arange(n)[:, None] * M + keys).ravel()
    counts = np.bincount(flat, minlength=n * M).reshape(n, M).astype(float)
    used = counts.any(axis=0)
    return [(counts[:, used], _key_values(norm, np.flatnonzero(used)))]


def _log_mass(eps: np.ndarray, factors) -> np.ndarray:
    total = np.zeros(eps.shape[0])
    for counts, values in factors:
        total += np.log(np.einsum("nm,nm->n", counts, np.exp(-eps[:, None] * values[None, :])))
    return total


def _bisect_rates(factors, target: float, n: int) -> np.ndarray:
    lo = np.zeros(n)
    hi = np.ones(n)
    while True:
        up = _log_mass(hi, factors) > target
        if not up.any():
            break
        lo = np.where(up, hi, lo)
        hi = np.where(up, hi * 2.0, hi)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        above = _log_mass(mid, factors) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def _check_p_max(p_max: float, K: int) -> str:
    """Classify p_max as 'uniform', 'identity' or 'interior'."""
    if not 0 < p_max <= 1:
        raise ValueError(f"p_max must lie in (0, 1], got {p_max}")
    if p_max * K < 1 - 1e-12:
        raise InfeasibleError(f"no solution: p_max={p_max} exceeds uniform (1/K = {1 / K:.6g})")
    if p_max * K <= 1 + 1e-12:
        return "uniform"
    if p_max == 1:
        return "identity"
    return "interior"


def solve_eps_x(
    domain: Domain, x, p_max: float, norm: NormKind = NormKind.EUCLIDEAN, method: str = "auto"
) -> float:
    """Rate ``eps_x`` with ``sum_y exp(-eps_x d(x, y)) = 1 / p_max``.

    ``method='enumerate'`` forces enumeration of the domain even for the
    Manhattan norm (used to cross-check the factorized evaluation).
    """
    table = BoundedGeometric(domain, p_max, norm, method=method)
    return float(table.rates(np.asarray(x, dtype=np.int64)[None, :])[0])


class BoundedGeometric:
    """Per-input-rate bounded geometric channel on ``domain``.

    ``eps_x`` caches solved rates keyed by the input point as a tuple.
    ``mode`` other than resample is supported for one attribute only and
    uses the unbounded two-sided geometric whose mode probability is
    ``p_max`` (a single rate for every input), then clips the tails onto
    the edge values or replaces them with a uniform draw.
    """

    def __init__(
        self,
        domain: Domain,
        p_max: float,
        norm: NormKind = NormKind.EUCLIDEAN,
        mode: BoundingMode = BoundingMode.RESAMPLE,
        method: str = "auto",
    ):
        self.domain = domain
        self.p_max = float(p_max)
        self.norm = NormKind(norm)
        self.mode = BoundingMode(mode)
        if method not in ("auto", "enumerate"):
            raise ValueError(f"unknown method {method!r}")
        if self.mode is not BoundingMode.RESAMPLE:
            if domain.d != 1:
                raise ValueError(f"{self.mode.value} bounding is only supported per attribute (1D)")
            if not 0 < self.p_max <= 1:
                raise ValueError(f"p_max must lie in (0, 1], got {p_max}")
            self.regime = "identity" if self.p_max == 1 else "interior"
        else:
            self.regime = _check_p_max(self.p_max, domain.size)
        # In 1D every norm is |y - x|, so the single-factor form always applies.
        self.factorized = method == "auto" and (self.norm is NormKind.MANHATTAN or domain.d == 1)
        if not self.factorized and domain.size > ENUMERATION_CAP:
            raise DataError(
                f"enumeration cap exceeded: K={domain.size} > {ENUMERATION_CAP} "
                f"for the {self.norm.value} norm"
            )
        self.eps_x: dict[tuple[int, ...], float] = {}

    def __repr__(self):
        return (
            f"BoundedGeometric(dims={self.domain.dims}, p_max={self.p_max}, "
            f"norm={self.norm.value}, mode={self.mode.value})"
        )

    @property
    def n_uniforms(self) -> int:
        """Uniform draws consumed per record by :meth:`sample_from_uniforms`."""
        if self.mode is BoundingMode.RESAMPLE and self.factorized:
            return self.domain.d
        return 1

    # -- rates -------------------------------------------------------------

    def _unbounded_rate(self) -> float:
        # mode probability (1 - t) / (1 + t) of the two-sided geometric, t = e^-eps
        if self.p_max == 1:
            return math.inf
        return -math.log((1 - self.p_max) / (1 + self.p_max))

    def rates(self, xs: np.ndarray) -> np.ndarray:
        """``eps_x`` for each row of ``xs`` (n, d)."""
        xs = np.asarray(xs, dtype=np.int64).reshape(-1, self.domain.d)
        self.domain.validate(xs)
        if self.mode is not BoundingMode.RESAMPLE:
            return np.full(xs.shape[0], self._unbounded_rate())
        if self.regime == "uniform":
            return np.zeros(xs.shape[0])
        if self.regime == "identity":
            return np.full(xs.shape[0], math.inf)
        uniq, inverse = np.unique(xs, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        missing = [i for i, row in enumerate(map(tuple, uniq.tolist())) if row not in self.eps_x]
        if missing:
            self._solve(uniq[missing])
        vals = np.array([self.eps_x[row] for row in map(tuple, uniq.tolist())])
        return vals[inverse]

    def _solve(self, xs: np.ndarray) -> None:
        target = -math.log(self.p_max)
        if self.factorized:
            chunk = max(1, _CHUNK_CELLS // max(self.domain.dims) // self.domain.d)
        else:
            chunk = max(1, _CHUNK_CELLS // self.domain.size)
        for start in range(0, xs.shape[0], chunk):
            part = xs[start : start + chunk]
            if self.factorized:
                factors = _factorized_profile(self.domain.dims, part)
            else:
                factors = _enumerated_profile(self.domain, self.norm, part)
            rates = _bisect_rates(factors, target, part.shape[0])
            for row, r in zip(map(tuple, part.tolist()), rates.tolist()):
                self.eps_x[row] = r

    # -- probabilities -----------------------------------------------------

    def _law_1d(self, x: int) -> np.ndarray:
        """Full output law for one 1D input under clip / uniform_replace."""
        k = self.domain.dims[0]
        ys = np.arange(k)
        if self.p_max == 1:
            return (ys == x).astype(float)
        t = (1 - self.p_max) / (1 + self.p_max)
        law = self.p_max * t ** np.abs(ys - x)
        below = self.p_max * t ** (x + 1) / (1 - t)
        above = self.p_max * t ** (k - x) / (1 - t)
        if self.mode is BoundingMode.CLIP:
            law[0] += below
            law[-1] += above
        else:
            law += (below + above) / k
        return law

    def log_probs_from(self, x) -> np.ndarray:
        """log P(y | x) for every y of the domain, in code order."""
        x = np.asarray(x, dtype=np.int64).reshape(1, -1)
        self.domain.validate(x)
        if self.mode is not BoundingMode.RESAMPLE:
            with np.errstate(divide="ignore"):
                return np.log(self._law_1d(int(x[0, 0])))
        grid = self.domain.grid()
        dist = distance(self.norm, grid - x)
        eps = self.rates(x)[0]
        if math.isinf(eps):
            return np.where(dist == 0, 0.0, -np.inf)
        return math.log(self.p_max) - eps * dist

    def prob(self, x, y) -> float:
        x = np.asarray(x, dtype=np.int64).reshape(1, -1)
        y = np.asarray(y, dtype=np.int64).reshape(1, -1)
        self.domain.validate(x)
        self.domain.validate(y)
        if self.mode is not BoundingMode.RESAMPLE:
            return float(self._law_1d(int(x[0, 0]))[int(y[0, 0])])
        eps = self.rates(x)[0]
        dist = float(distance(self.norm, y - x)[0])
        if dist == 0:
            return self.p_max
        return self.p_max * math.exp(-eps * dist)

    def log_channel(self) -> np.ndarray:
        """(K, K) matrix of log P(y|x); rows are inputs in code order."""
        self.domain.checked_size(CHANNEL_CAP)
        return self.log_channel_rows(self.domain.grid())

    def log_channel_rows(self, xs) -> np.ndarray:
        """log P(y|x) over every y (code order) for each input row of ``xs``."""
        xs = np.asarray(xs, dtype=np.int64).reshape(-1, self.domain.d)
        if self.mode is not BoundingMode.RESAMPLE:
            return np.stack([self.log_probs_from(x) for x in xs])
        grid = self.domain.grid()
        eps = self.rates(xs)
        dist = distance(self.norm, grid[None, :, :] - xs[:, None, :])
        with np.errstate(invalid="ignore"):
            out = math.log(self.p_max) - eps[:, None] * dist
        out[dist == 0] = math.log(self.p_max)
        return out

    # -- sampling ----------------------------------------------------------

    def sample_from_uniforms(self, xs: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Inverse-CDF draws for each input row, ``u`` of shape (n, n_uniforms)."""
        xs = np.asarray(xs, dtype=np.int64).reshape(-1, self.domain.d)
        u = np.asarray(u, dtype=float).reshape(xs.shape[0], self.n_uniforms)
        if self.mode is BoundingMode.RESAMPLE and self.factorized:
            return self._sample_factorized(xs, u)
        return self._sample_enumerated(xs, u[:, 0])

    def _sample_factorized(self, xs, u):
        eps = self.rates(xs)
        out = np.empty_like(xs)
        for i, k in enumerate(self.domain.dims):
            chunk = max(1, _CHUNK_CELLS // k)
            ys = np.arange(k)
            for s in range(0, xs.shape[0], chunk):
                gap = np.abs(ys[None, :] - xs[s : s + chunk, i : i + 1])
                e = eps[s : s + chunk, None]
                with np.errstate(invalid="ignore"):
                    w = np.where(gap == 0, 1.0, np.exp(-e * gap))
                cdf = np.cumsum(w, axis=1)
                hit = (cdf < u[s : s + chunk, i : i + 1] * cdf[:, -1:]).sum(axis=1)
                out[s : s + chunk, i] = np.minimum(hit, k - 1)
        return out

    def _sample_enumerated(self, xs, u):
        codes = self.domain.encode(xs)
        uniq, inverse = np.unique(codes, return_inverse=True)
        inverse = inverse.reshape(-1)
        out_codes = np.empty_like(codes)
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(uniq.size + 1))
        K = self.domain.size
        for j, code in enumerate(uniq):
            rows = order[bounds[j] : bounds[j + 1]]
            cdf = np.cumsum(np.exp(self.log_probs_from(self.domain.decode(code))))
            hit = np.searchsorted(cdf, u[rows] * cdf[-1], side="right")
            out_codes[rows] = np.minimum(hit, K - 1)
        return self.domain.decode(out_codes)


def geo_prob(table: BoundedGeometric, x, y) -> float:
    return table.prob(x, y)


def geo_sample(table: BoundedGeometric, x, rng) -> np.ndarray:
    g = as_generator(rng)
    u = g.random((1, table.n_uniforms))
    return table.sample_from_uniforms(np.asarray(x)[None, :], u)[0]
