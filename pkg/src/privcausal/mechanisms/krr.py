"""k-ary randomized response."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data import Domain
from ..errors import DataError
from ..rng import as_generator

# k-RR Comb only needs k, never a k x k table, so the cap is on the code range.
KRR_COMB_CAP = 10**12


@dataclass(frozen=True)
class KrrParams:
    """Keep the true value with probability ``p = e^eps / (k - 1 + e^eps)``,
    otherwise report one of the other ``k - 1`` values uniformly.
    """

    k: int
    epsilon: float

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k-RR needs k >= 2")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")

    @property
    def log_p(self) -> float:
        return -math.log1p((self.k - 1) * math.exp(-self.epsilon))

    @property
    def log_q(self) -> float:
        return self.log_p - self.epsilon

    @property
    def p(self) -> float:
        return math.exp(self.log_p)

    @property
    def q(self) -> float:
        return math.exp(self.log_q)

    def log_channel(self) -> np.ndarray:
        out = np.full((self.k, self.k), self.log_q)
        np.fill_diagonal(out, self.log_p)
        return out


def krr_from_uniforms(v, k: int, p: float, u_keep, u_alt) -> np.ndarray:
    """Vectorized k-RR driven by two uniforms per value.

    ``u_keep < p`` keeps ``v``; otherwise ``u_alt`` picks one of the
    ``k - 1`` other values by shifting ``v`` by ``1 .. k-1`` modulo ``k``.
    """
    v = np.asarray(v, dtype=np.int64)
    shift = 1 + np.minimum(np.floor(np.asarray(u_alt) * (k - 1)).astype(np.int64), k - 2)
    return np.where(np.asarray(u_keep) < p, v, (v + shift) % k)


def krr_sample(v: int, params: KrrParams, rng) -> int:
    if not 0 <= v < params.k:
        raise DataError(f"value {v} out of range [0, {params.k - 1}]")
    g = as_generator(rng)
    u = g.random(2)
    return int(krr_from_uniforms(v, params.k, params.p, u[0], u[1]))


def krr_cwise_split(epsilon: float, domain: Domain) -> list[float]:
    """Split a total budget across attributes proportionally to ``k_i``."""
    total = sum(domain.dims)
    return [epsilon * k / total for k in domain.dims]


def krr_comb_params(domain: Domain, epsilon: float) -> KrrParams:
    K = domain.size
    if K > KRR_COMB_CAP:
        raise DataError(f"oversized combined domain: K={K} exceeds {KRR_COMB_CAP}")
    return KrrParams(K, epsilon)
