"""Mechanism menu: k-RR / geometric, applied per attribute (C-wise) or to the
whole record (Comb), plus record-wise privatization of datasets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from ..data import Dataset, Domain
from ..errors import InfeasibleError
from ..rng import RngSeed, as_generator
from .geometric import BoundedGeometric, BoundingMode, NormKind
from .krr import KrrParams, krr_comb_params, krr_cwise_split, krr_from_uniforms

ROW_BLOCK = 1024


class MechanismKind(str, Enum):
    KRR_CWISE = "krr_cwise"
    KRR_COMB = "krr_comb"
    GEO_CWISE = "geo_cwise"
    GEO_COMB = "geo_comb"

    @property
    def is_geo(self) -> bool:
        return self in (MechanismKind.GEO_CWISE, MechanismKind.GEO_COMB)

    @property
    def is_cwise(self) -> bool:
        return self in (MechanismKind.KRR_CWISE, MechanismKind.GEO_CWISE)


class CwiseSplit(str, Enum):
    PER_ATTRIBUTE = "per_attribute"
    JOINT = "joint"


@dataclass(frozen=True)
class MechanismSpec:
    """Which mechanism and how strong.

    Exactly one of ``epsilon`` and ``max_prob`` is set. ``epsilon`` may be a
    tuple of per-attribute budgets for ``krr_cwise``; a scalar is split
    proportionally to the attribute sizes. ``max_prob`` is the privacy level
    (probability of reporting the true value); for C-wise kinds
    ``cwise_split`` decides whether it holds per attribute or for the whole
    record.
    """

    kind: MechanismKind
    epsilon: Union[float, tuple, None] = None
    max_prob: Optional[float] = None
    norm: NormKind = NormKind.EUCLIDEAN
    mode: BoundingMode = BoundingMode.RESAMPLE
    cwise_split: CwiseSplit = CwiseSplit.JOINT

    def __post_init__(self):
        object.__setattr__(self, "kind", MechanismKind(self.kind))
        object.__setattr__(self, "norm", NormKind(self.norm))
        object.__setattr__(self, "mode", BoundingMode(self.mode))
        object.__setattr__(self, "cwise_split", CwiseSplit(self.cwise_split))
        if (self.epsilon is None) == (self.max_prob is None):
            raise ValueError("set exactly one of epsilon and max_prob")
        if isinstance(self.epsilon, (list, tuple)):
            if self.kind is not MechanismKind.KRR_CWISE:
                raise ValueError("per-attribute epsilons only apply to krr_cwise")
            object.__setattr__(self, "epsilon", tuple(float(e) for e in self.epsilon))
        if self.kind.is_geo and self.epsilon is not None:
            raise ValueError("geometric mechanisms are parameterized by max_prob")
        if not self.kind.is_geo and (
            self.norm is not NormKind.EUCLIDEAN or self.mode is not BoundingMode.RESAMPLE
        ):
            raise ValueError("norm and mode only apply to geometric mechanisms")

    def label(self) -> str:
        parts = [self.kind.value]
        if self.kind.is_geo:
            parts.append(self.norm.value)
            if self.mode is not BoundingMode.RESAMPLE:
                parts.append(self.mode.value)
        if self.kind.is_cwise and self.cwise_split is CwiseSplit.JOINT:
            parts.append("joint")
        return "-".join(parts)


def _krr_p(eps: float, k: int) -> float:
    return 1.0 / (1.0 + (k - 1) * math.exp(-eps))


def krr_eps_for_level(level: float, k: int) -> float:
    # uniform-level tolerance mirrors the geometric p_max = 1/K case
    if level * k < 1 - 1e-12:
        raise InfeasibleError(f"level {level} below the uniform-guessing floor 1/{k}")
    if level * k <= 1 + 1e-12:
        return 0.0
    if level >= 1:
        return math.inf
    return math.log(level * (k - 1) / (1 - level))


def krr_cwise_total_eps(level: float, dims) -> float:
    """Total budget whose proportional split gives joint keep-all probability ``level``."""
    K = math.prod(dims)
    total = sum(dims)
    if level * K < 1 - 1e-12:
        raise InfeasibleError(f"level {level} below the uniform-guessing floor 1/{K}")
    if level * K <= 1 + 1e-12:
        return 0.0
    if level >= 1:
        return math.inf

    def joint(eps):
        return sum(math.log(_krr_p(eps * k / total, k)) for k in dims)

    target = math.log(level)
    lo, hi = 0.0, 1.0
    while joint(hi) < target:
        lo, hi = hi, hi * 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if joint(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def geo_joint_split(level: float, dims) -> list[float]:
    """Per-attribute mode probabilities ``level ** (ln k_i / ln K)``.

    Their product is ``level``; with equal sizes this is ``level ** (1/d)``,
    and every ``p_i >= 1/k_i`` exactly when ``level >= 1/K``.
    """
    if not 0 < level <= 1:
        raise ValueError(f"level must lie in (0, 1], got {level}")
    log_K = sum(math.log(k) for k in dims)
    return [level ** (math.log(k) / log_K) for k in dims]


def _kron_log(mats: list[np.ndarray]) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = (out[:, None, :, None] + m[None, :, None, :]).reshape(
            out.shape[0] * m.shape[0], out.shape[1] * m.shape[1]
        )
    return out


def _product_rows(mats: list[np.ndarray], xs: np.ndarray) -> np.ndarray:
    out = mats[0][xs[:, 0]]
    for i, m in enumerate(mats[1:], start=1):
        out = (out[:, :, None] + m[xs[:, i]][:, None, :]).reshape(xs.shape[0], -1)
    return out


class Mechanism:
    """A mechanism bound to a domain.

    ``apply(rows, u)`` privatizes records given ``n_uniforms`` uniform draws
    per record; ``log_channel()`` is the full (K, K) log-probability matrix for
    small domains and ``log_channel_rows(xs)`` its rows for the inputs ``xs``.
    """

    n_uniforms: int
    domain: Domain

    def apply(self, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_channel(self) -> np.ndarray:
        raise NotImplementedError

    def log_channel_rows(self, xs: np.ndarray) -> np.ndarray:
        return self.log_channel()[self.domain.encode(xs)]


class KrrComb(Mechanism):
    def __init__(self, domain: Domain, epsilon: float):
        self.domain = domain
        self.params = krr_comb_params(domain, epsilon)
        self.n_uniforms = 2

    def apply(self, rows, u):
        codes = self.domain.encode(rows)
        out = krr_from_uniforms(codes, self.params.k, self.params.p, u[:, 0], u[:, 1])
        return self.domain.decode(out)

    def log_channel(self):
        return self.params.log_channel()

    def log_channel_rows(self, xs):
        codes = self.domain.encode(xs)
        out = np.full((codes.size, self.params.k), self.params.log_q)
        out[np.arange(codes.size), codes] = self.params.log_p
        return out


class KrrCwise(Mechanism):
    def __init__(self, domain: Domain, epsilons):
        self.domain = domain
        self.params = [KrrParams(k, e) for k, e in zip(domain.dims, epsilons)]
        self.n_uniforms = 2 * domain.d

    def apply(self, rows, u):
        out = np.empty_like(rows)
        for i, prm in enumerate(self.params):
            out[:, i] = krr_from_uniforms(rows[:, i], prm.k, prm.p, u[:, 2 * i], u[:, 2 * i + 1])
        return out

    def attribute_log_channels(self):
        return [p.log_channel() for p in self.params]

    def log_channel(self):
        return _kron_log(self.attribute_log_channels())

    def log_channel_rows(self, xs):
        return _product_rows(self.attribute_log_channels(), np.asarray(xs, dtype=np.int64))


class GeoComb(Mechanism):
    def __init__(self, domain: Domain, p_max: float, norm, mode):
        self.domain = domain
        self.table = BoundedGeometric(domain, p_max, norm, mode)
        self.n_uniforms = self.table.n_uniforms

    def apply(self, rows, u):
        return self.table.sample_from_uniforms(rows, u)

    def log_channel(self):
        return self.table.log_channel()

    def log_channel_rows(self, xs):
        return self.table.log_channel_rows(xs)


class GeoCwise(Mechanism):
    def __init__(self, domain: Domain, p_maxes, norm, mode):
        self.domain = domain
        self.tables = [
            BoundedGeometric(Domain((k,), (name,)), p, norm, mode)
            for k, name, p in zip(domain.dims, domain.names, p_maxes)
        ]
        self.n_uniforms = domain.d

    def apply(self, rows, u):
        out = np.empty_like(rows)
        for i, t in enumerate(self.tables):
            out[:, i] = t.sample_from_uniforms(rows[:, i : i + 1], u[:, i : i + 1])[:, 0]
        return out

    def attribute_log_channels(self):
        return [t.log_channel() for t in self.tables]

    def log_channel(self):
        return _kron_log(self.attribute_log_channels())

    def log_channel_rows(self, xs):
        return _product_rows(self.attribute_log_channels(), np.asarray(xs, dtype=np.int64))


def build_mechanism(spec: MechanismSpec, domain: Domain) -> Mechanism:
    """Resolve ``spec`` against ``domain``; raises InfeasibleError for impossible levels."""
    kind, d = spec.kind, domain.d
    if kind is MechanismKind.KRR_COMB:
        eps = spec.epsilon
        if eps is None:
            eps = krr_eps_for_level(spec.max_prob, domain.size)
        return KrrComb(domain, eps)
    if kind is MechanismKind.KRR_CWISE:
        if isinstance(spec.epsilon, tuple):
            if len(spec.epsilon) != d:
                raise ValueError(f"{len(spec.epsilon)} epsilons for {d} attributes")
            eps = list(spec.epsilon)
        elif spec.epsilon is not None:
            eps = krr_cwise_split(spec.epsilon, domain)
        elif spec.cwise_split is CwiseSplit.PER_ATTRIBUTE:
            eps = [krr_eps_for_level(spec.max_prob, k) for k in domain.dims]
        else:
            eps = krr_cwise_split(krr_cwise_total_eps(spec.max_prob, domain.dims), domain)
        return KrrCwise(domain, eps)
    if kind is MechanismKind.GEO_COMB:
        return GeoComb(domain, spec.max_prob, spec.norm, spec.mode)
    if spec.cwise_split is CwiseSplit.PER_ATTRIBUTE:
        p = [spec.max_prob] * d
    else:
        p = geo_joint_split(spec.max_prob, domain.dims)
    return GeoCwise(domain, p, spec.norm, spec.mode)


def privatize_rows(mech: Mechanism, rows: np.ndarray, rng) -> np.ndarray:
    """Privatize each record independently.

    With an :class:`RngSeed`, rows ``[b*ROW_BLOCK, (b+1)*ROW_BLOCK)`` draw
    their uniforms from child stream ``b``, so the output does not depend on
    how blocks are scheduled.
    """
    rows = np.asarray(rows, dtype=np.int64)
    n = rows.shape[0]
    if isinstance(rng, RngSeed):
        u = np.empty((n, mech.n_uniforms))
        for b, start in enumerate(range(0, n, ROW_BLOCK)):
            stop = min(start + ROW_BLOCK, n)
            u[start:stop] = rng.child(b).generator().random((stop - start, mech.n_uniforms))
    else:
        u = as_generator(rng).random((n, mech.n_uniforms))
    return mech.apply(rows, u)


def privatize_dataset(ds: Dataset, spec: MechanismSpec, rng) -> Dataset:
    mech = build_mechanism(spec, ds.domain)
    return Dataset(ds.domain, privatize_rows(mech, ds.rows, rng))
