"""Measured privacy of a channel: worst-case log-likelihood ratios."""

from __future__ import annotations

import numpy as np

from ..data import Domain
from .geometric import BoundedGeometric, NormKind, distance
from .krr import KrrParams
from .spec import Mechanism


def log_channel_of(mech) -> np.ndarray:
    if isinstance(mech, (KrrParams, BoundedGeometric, Mechanism)):
        return mech.log_channel()
    return np.asarray(mech, dtype=float)


def _pair_log_ratio(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """max_y |log P(y|a) - log P(y|b)| per row pair; both-zero outputs are ignored."""
    both_zero = np.isneginf(a) & np.isneginf(b)
    with np.errstate(invalid="ignore"):
        diff = np.abs(a - b)
    diff[both_zero] = 0.0
    return diff.max(axis=-1)


def ldp_epsilon(log_ch: np.ndarray) -> float:
    """max over (x1, x2, y) of ln P(y|x1)/P(y|x2); inf when some P(y|x) is 0 but not all."""
    hi = log_ch.max(axis=0)
    lo = log_ch.min(axis=0)
    live = ~np.isneginf(hi)
    with np.errstate(invalid="ignore"):
        return float(np.max(hi[live] - lo[live]))


def dprivacy_epsilon(log_ch: np.ndarray, points: np.ndarray, norm: NormKind) -> float:
    """Smallest eps with P(y|x1) <= exp(eps d(x1, x2)) P(y|x2) for all triples."""
    best = 0.0
    for i in range(points.shape[0]):
        ratio = _pair_log_ratio(log_ch[i][None, :], log_ch)
        dist = distance(norm, points - points[i])
        mask = dist > 0
        if mask.any():
            best = max(best, float(np.max(ratio[mask] / dist[mask])))
    return best


def audit_effective_eps(mech, domain: Domain | None = None, norms=tuple(NormKind)) -> dict:
    """Diagnostics for a mechanism on an enumerable domain.

    ``mech`` may be :class:`KrrParams` (a 1D domain of size k is assumed
    when ``domain`` is omitted), a :class:`BoundedGeometric` table, a built
    :class:`Mechanism` or a raw (K, K) channel of probabilities.
    """
    if domain is None:
        if isinstance(mech, KrrParams):
            domain = Domain((mech.k,))
        else:
            domain = mech.domain
    log_ch = log_channel_of(mech)
    if not isinstance(mech, (KrrParams, BoundedGeometric, Mechanism)):
        with np.errstate(divide="ignore"):
            log_ch = np.log(log_ch)
    if log_ch.shape != (domain.size, domain.size):
        raise ValueError(f"channel shape {log_ch.shape} does not match K={domain.size}")
    points = domain.grid()
    return {
        "ldp_eps": ldp_epsilon(log_ch),
        "dpriv_eps": {NormKind(n).value: dprivacy_epsilon(log_ch, points, NormKind(n)) for n in norms},
    }


def bayes_success(log_ch: np.ndarray) -> float:
    """Success of a MAP attacker with uniform prior: sum_y max_x P(y|x) / K."""
    return float(np.exp(log_ch).max(axis=0).sum() / log_ch.shape[0])


def bayes_success_enumerated(mech: Mechanism, block: int = 256, cap: int = 10**5) -> float:
    """:func:`bayes_success` over the full domain without holding the (K, K)
    channel: input rows are streamed in blocks and the column maxima kept."""
    dom = mech.domain
    K = dom.checked_size(cap)
    best = np.zeros(K)
    for start in range(0, K, block):
        xs = dom.decode(np.arange(start, min(K, start + block)))
        np.maximum(best, np.exp(mech.log_channel_rows(xs)).max(axis=0), out=best)
    return float(best.sum() / K)
