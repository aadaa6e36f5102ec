"""Conditional independence tests on discretized data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special, stats

from ..data import Dataset


@dataclass(frozen=True)
class CiTestConfig:
    test: str = "fisher_z"  # or "chi_square"
    alpha: float = 0.05

    def __post_init__(self):
        aliases = {"fisherz": "fisher_z", "chi2": "chi_square", "gaussian": "fisher_z"}
        object.__setattr__(self, "test", aliases.get(self.test, self.test))
        if self.test not in ("fisher_z", "chi_square"):
            raise ValueError(f"unknown CI test {self.test!r}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class CiResult:
    independent: bool
    p_value: float
    statistic: float
    df: float = float("nan")
    flag: str = ""


def chi_square_table(counts: np.ndarray) -> tuple[float, int]:
    """Pearson statistic and degrees of freedom summed over strata.

    ``counts`` is (strata, r, c) or a single (r, c) table. Rows and columns
    with zero marginal count are dropped per stratum; strata left with fewer
    than two rows or columns contribute nothing.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim == 2:
        counts = counts[None]
    rows = counts.sum(axis=2)
    cols = counts.sum(axis=1)
    tot = rows.sum(axis=1)
    live = tot > 0
    counts, rows, cols, tot = counts[live], rows[live], cols[live], tot[live]
    expected = rows[:, :, None] * cols[:, None, :] / tot[:, None, None]
    pos = expected > 0
    stat = float(np.sum((counts[pos] - expected[pos]) ** 2 / expected[pos]))
    r = (rows > 0).sum(axis=1)
    c = (cols > 0).sum(axis=1)
    df = int(np.sum(np.where((r >= 2) & (c >= 2), (r - 1) * (c - 1), 0)))
    return stat, df


def _strata(rows: np.ndarray, cond: Sequence[int]) -> np.ndarray:
    if not cond:
        return np.zeros(rows.shape[0], dtype=np.int64)
    _, inv = np.unique(rows[:, list(cond)], axis=0, return_inverse=True)
    return inv.reshape(-1)


def chi_square_ci(ds: Dataset, i: int, j: int, cond: Sequence[int] = (), alpha: float = 0.05) -> CiResult:
    cond = list(cond)
    if i == j or i in cond or j in cond:
        raise ValueError("test attributes must be distinct from each other and the conditioning set")
    ki, kj = ds.domain.dims[i], ds.domain.dims[j]
    s = _strata(ds.rows, cond)
    n_s = int(s.max()) + 1
    flat = (s * ki + ds.rows[:, i]) * kj + ds.rows[:, j]
    counts = np.bincount(flat, minlength=n_s * ki * kj).reshape(n_s, ki, kj)
    stat, df = chi_square_table(counts)
    if df == 0:
        return CiResult(True, 1.0, stat, 0, "untestable")
    p = float(special.gammaincc(df / 2.0, stat / 2.0))
    return CiResult(p >= alpha, p, stat, df)


def partial_correlation(corr: np.ndarray) -> tuple[float, str]:
    """Partial correlation of variables 0 and 1 given the rest, from a correlation matrix."""
    flag = ""
    if np.linalg.cond(corr) > 1e12:
        corr = corr + 1e-10 * np.eye(corr.shape[0])
        flag = "singular"
    prec = np.linalg.inv(corr)
    r = -prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1])
    return float(r), flag


def fisher_z_from_corr(corr: np.ndarray, n: int, alpha: float = 0.05) -> CiResult:
    """Fisher-Z test of the (0, 1) partial correlation given variables 2.."""
    n_cond = corr.shape[0] - 2
    if n <= n_cond + 3:
        raise ValueError(f"need n > |cond| + 3, got n={n}, |cond|={n_cond}")
    if not np.isfinite(corr).all():
        return CiResult(True, 1.0, 0.0, flag="degenerate")
    r, flag = partial_correlation(corr)
    r = float(np.clip(r, -1 + 1e-15, 1 - 1e-15))
    z = np.arctanh(r) * np.sqrt(n - n_cond - 3)
    p = float(2 * stats.norm.sf(abs(z)))
    return CiResult(p >= alpha, p, float(z), flag=flag)


def correlation_matrix(x: np.ndarray) -> np.ndarray:
    """Pearson correlations; rows/columns of constant variables are NaN."""
    x = np.asarray(x, dtype=float)
    xc = x - x.mean(axis=0)
    sd = np.sqrt((xc * xc).mean(axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        z = xc / sd
        c = (z.T @ z) / x.shape[0]
    c[:, sd == 0] = np.nan
    c[sd == 0, :] = np.nan
    np.fill_diagonal(c, np.where(sd == 0, np.nan, 1.0))
    return c


def fisher_z_ci(ds: Dataset, i: int, j: int, cond: Sequence[int] = (), alpha: float = 0.05) -> CiResult:
    idx = [i, j, *cond]
    corr = correlation_matrix(ds.rows[:, idx])
    return fisher_z_from_corr(corr, ds.n, alpha)


class CiTester:
    """CI test bound to a dataset, with the correlation matrix cached for Fisher-Z."""

    def __init__(self, ds: Dataset, cfg: CiTestConfig):
        self.ds = ds
        self.cfg = cfg
        self._corr = correlation_matrix(ds.rows) if cfg.test == "fisher_z" else None

    def __call__(self, i: int, j: int, cond: Sequence[int]) -> CiResult:
        if self.cfg.test == "chi_square":
            return chi_square_ci(self.ds, i, j, cond, self.cfg.alpha)
        idx = [i, j, *cond]
        return fisher_z_from_corr(self._corr[np.ix_(idx, idx)], self.ds.n, self.cfg.alpha)
