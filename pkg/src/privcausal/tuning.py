"""Common privacy scale for k-RR and geometric mechanisms.

The level of a mechanism is the success probability of an attacker who, with
a uniform prior, guesses the input with maximum posterior given the report.
Both mechanism families report the true value with the highest probability,
so the level is simply that probability: ``p`` for k-RR, ``p_max`` for the
bounded geometric.
"""

from __future__ import annotations

import math
from typing import Iterable

from .data import Domain
from .errors import InfeasibleError

DEFAULT_LEVELS = (0.05, 0.1, 0.5)


def privacy_of_krr(epsilon: float, k: int) -> float:
    if epsilon < 0 or k < 2:
        raise ValueError("need epsilon >= 0 and k >= 2")
    if math.isinf(epsilon):
        return 1.0
    return 1.0 / (1.0 + (k - 1) * math.exp(-epsilon))


def epsilon_for_krr(level: float, k: int) -> float:
    """Inverse of :func:`privacy_of_krr`: ``ln(level (k-1) / (1-level))``.

    A level at the floor ``1/k`` (within 1e-12 relative) gives 0.
    """
    if level >= 1:
        raise InfeasibleError("level must be < 1 (level 1 means no privacy)")
    if level * k < 1 - 1e-12:
        raise InfeasibleError(f"level {level} below the uniform-guessing floor 1/{k}")
    if level * k <= 1 + 1e-12:
        return 0.0
    return math.log(level * (k - 1) / (1 - level))


def privacy_of_geo(p_max: float) -> float:
    if not 0 < p_max <= 1:
        raise ValueError("p_max must lie in (0, 1]")
    return p_max


def matched_specs(level: float, domain: Domain, kinds: Iterable, cwise_split="joint", norm="euclidean", mode="resample"):
    """One spec per mechanism kind, all at privacy ``level``.

    Returns ``(specs, errors)``: ``errors`` maps each infeasible kind to the
    reason. k-RR Comb is resolved to an explicit epsilon; C-wise kinds and
    the geometric mechanisms carry the level as ``max_prob`` and resolve it
    per attribute according to ``cwise_split``.
    """
    from .mechanisms.spec import MechanismKind, MechanismSpec, build_mechanism

    specs, errors = [], {}
    for kind in kinds:
        kind = MechanismKind(kind)
        try:
            if kind is MechanismKind.KRR_COMB:
                K = domain.size
                eps = epsilon_for_krr(level, K)
                spec = MechanismSpec(kind, epsilon=eps)
            elif kind.is_geo:
                spec = MechanismSpec(kind, max_prob=level, norm=norm, mode=mode, cwise_split=cwise_split)
            else:
                spec = MechanismSpec(kind, max_prob=level, cwise_split=cwise_split)
            if kind is not MechanismKind.KRR_COMB:
                build_mechanism(spec, domain)  # surfaces infeasibility now
            specs.append(spec)
        except (InfeasibleError, ValueError) as exc:
            errors[kind.value] = str(exc)
    return specs, errors
