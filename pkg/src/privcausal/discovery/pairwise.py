"""Forced-decision cause-effect deciders for a single pair (x, y).

Every decider returns a :class:`DirectionDecision` whose ``score`` is
positive when the evidence favours ``x -> y``. Swapping the arguments
negates the score. Exact ties are resolved as ``x -> y`` with ``forced`` set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

from ..errors import DataError
from ..rng import as_generator

X_TO_Y = "x_to_y"
Y_TO_X = "y_to_x"
TIE_TOL = 1e-12


@dataclass(frozen=True)
class DirectionDecision:
    direction: str
    score: float
    forced: bool = False


def _decide(score: float) -> DirectionDecision:
    if abs(score) < TIE_TOL:
        return DirectionDecision(X_TO_Y, float(score), True)
    return DirectionDecision(X_TO_Y if score > 0 else Y_TO_X, float(score))


def _as_pair(x, y, min_n: int):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise DataError("x and y must have the same length")
    if x.size < min_n:
        raise DataError(f"need at least {min_n} samples, got {x.size}")
    for name, v in (("x", x), ("y", y)):
        if np.ptp(v) == 0:
            raise DataError(f"{name} is constant")
    return x, y


def _standardize(v):
    return (v - v.mean()) / v.std()


# -- RECI ------------------------------------------------------------------


def _cubic_mse(a, b) -> float:
    design = np.vander(a, 4)
    coef, *_ = np.linalg.lstsq(design, b, rcond=None)
    return float(np.mean((b - design @ coef) ** 2))


def reci(x, y) -> DirectionDecision:
    """Regression-error comparison with cubic fits on [0, 1]-rescaled data.

    The direction with the smaller mean squared error is taken as causal.
    """
    x, y = _as_pair(x, y, 10)
    x = (x - x.min()) / np.ptp(x)
    y = (y - y.min()) / np.ptp(y)
    return _decide(_cubic_mse(y, x) - _cubic_mse(x, y))


# -- IGCI ------------------------------------------------------------------


def spacing_entropy(v) -> float:
    """1-spacing differential entropy estimate; zero gaps are skipped."""
    v = np.sort(np.asarray(v, dtype=float))
    n = v.size
    gaps = np.diff(v)
    gaps = gaps[gaps != 0]
    return float(special.digamma(n) - special.digamma(1) + np.log(gaps).sum() / (n - 1))


def igci(x, y) -> DirectionDecision:
    """Entropy-based IGCI with a Gaussian reference measure.

    With both variables standardized, a deterministic invertible map lowers
    the entropy of the effect, so ``x -> y`` when H(y) < H(x).
    """
    x, y = _as_pair(x, y, 20)
    if np.unique(x).size < 2 or np.unique(y).size < 2:
        raise DataError("need at least 2 distinct values per variable")
    return _decide(spacing_entropy(_standardize(x)) - spacing_entropy(_standardize(y)))


# -- CDS -------------------------------------------------------------------

CDS_BINS = 13


def _quantize(z):
    # 13 bins of width 0.5 std, centred on -3 .. 3
    half = CDS_BINS // 2
    return np.clip(np.rint(z * half / 3.0), -half, half).astype(np.int64) + half


def cds_spread(x, y, min_count: int = 5) -> float:
    """Variability of the standardized conditional distributions of y given x-bins."""
    xq = _quantize(_standardize(x))
    hists = []
    for b in range(CDS_BINS):
        sel = xq == b
        if sel.sum() < min_count:
            continue
        yy = y[sel]
        sd = yy.std()
        yz = (yy - yy.mean()) / sd if sd > 0 else np.zeros_like(yy)
        hists.append(np.bincount(_quantize(yz), minlength=CDS_BINS) / yy.size)
    if not hists:
        raise DataError(f"no bin holds {min_count} samples")
    return float(np.asarray(hists).std(axis=0).mean())


def cds(x, y, min_count: int = 5) -> DirectionDecision:
    """Conditional distribution similarity: lower spread in the causal direction."""
    x, y = _as_pair(x, y, 50)
    return _decide(cds_spread(y, x, min_count) - cds_spread(x, y, min_count))


# -- ANM -------------------------------------------------------------------


def _median_bandwidth(v):
    d = np.abs(v[:, None] - v[None, :])
    d = d[np.triu_indices(v.size, 1)]
    d = d[d > 0]
    return float(np.median(d)) if d.size else 1.0


def _rbf(a, b, width):
    return np.exp(-((a[:, None] - b[None, :]) ** 2) / (2 * width**2))


def gp_residuals(x, y, jitter: float = 1e-4) -> np.ndarray:
    """Residuals of a GP posterior-mean fit of y on x (RBF, median lengthscale).

    The observation noise starts at ``jitter * var(y)`` and grows tenfold
    (up to 0.1 * var(y)) until the kernel matrix factorizes.
    """
    K = _rbf(x, x, _median_bandwidth(x))
    var = y.var()
    noise = jitter
    while True:
        try:
            c = linalg.cho_factor(K + noise * var * np.eye(x.size), lower=True)
            break
        except linalg.LinAlgError:
            noise *= 10
            if noise > 0.1 + 1e-12:
                raise DataError("kernel matrix not positive definite after jitter escalation") from None
    alpha = linalg.cho_solve(c, y - y.mean())
    return y - y.mean() - K @ alpha


def normalized_hsic(a, b) -> float:
    """HSIC with Gaussian kernels (median bandwidth), scaled into [0, 1]."""
    n = a.size
    K = _rbf(a, a, _median_bandwidth(a))
    L = _rbf(b, b, _median_bandwidth(b))
    Kc = K - K.mean(axis=0) - K.mean(axis=1)[:, None] + K.mean()
    Lc = L - L.mean(axis=0) - L.mean(axis=1)[:, None] + L.mean()
    kl = np.sum(Kc * Lc) / n**2
    kk = np.sum(Kc * Kc) / n**2
    ll = np.sum(Lc * Lc) / n**2
    if kk <= 0 or ll <= 0:
        return 0.0
    return float(max(kl, 0.0) / np.sqrt(kk * ll))


def anm(x, y, max_samples: int = 500, rng=0) -> DirectionDecision:
    """Additive-noise model: fit both directions, keep the one whose residuals
    are more independent of the input."""
    x, y = _as_pair(x, y, 50)
    if x.size > max_samples:
        idx = np.sort(as_generator(rng).choice(x.size, max_samples, replace=False))
        x, y = x[idx], y[idx]
    x, y = _standardize(x), _standardize(y)
    fwd = normalized_hsic(x, gp_residuals(x, y))
    bwd = normalized_hsic(y, gp_residuals(y, x))
    return _decide(bwd - fwd)


PAIRWISE = {"reci": reci, "igci": igci, "cds": cds, "anm": anm}
