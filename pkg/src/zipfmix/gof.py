"""One-sample Kolmogorov-Smirnov test for weighted (heavily tied) samples."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = ["KsResult", "ks_statistic", "ks_pvalue", "ks_test", "ks_statistic_bound", "weighted_points"]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n: int
    # the asymptotic p-value is used whether or not the sample has ties
    has_ties: bool = False

    def as_dict(self):
        return {"statistic": self.statistic, "p_value": self.p_value, "n": self.n, "has_ties": self.has_ties}


def weighted_points(sample):
    """Return sorted distinct points and their integer weights.

    Accepts a ``LambdaSequence``-like object (``entries`` of ``(x, w)``), a
    sequence of ``(x, w)`` pairs given as a 2-column array, or a flat array of
    raw observations.
    """
    entries = getattr(sample, "entries", None)
    if entries is not None:
        pts = np.array([e[0] for e in entries], dtype=float)
        wts = np.array([e[1] for e in entries], dtype=np.int64)
        order = np.argsort(pts, kind="stable")
        pts, wts = pts[order], wts[order]
        # merge equal points, if any
        uniq, inv = np.unique(pts, return_inverse=True)
        return uniq, np.bincount(inv, weights=wts).astype(np.int64)
    arr = np.asarray(sample, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("empty sample")
    uniq, counts = np.unique(arr, return_counts=True)
    return uniq, counts.astype(np.int64)


def ks_statistic(sample, cdf: Callable[[float], float]) -> float:
    """sup |F_n - F| for a continuous F, checked on both sides of every jump."""
    pts, wts = weighted_points(sample)
    if pts.size == 0:
        raise DomainError("empty sample")
    n = int(wts.sum())
    cum = np.cumsum(wts)
    upper = cum / n
    lower = (cum - wts) / n
    f = np.array([cdf(float(x)) for x in pts], dtype=float)
    return float(max(np.max(upper - f), np.max(f - lower), 0.0))


def ks_statistic_bound(sorted_sample: np.ndarray, cdf_on_grid: np.ndarray, grid: np.ndarray) -> float:
    """Upper bound on the KS distance of a large sample using F only on ``grid``.

    For x in [g_j, g_j+1], F(g_j) <= F(x) <= F(g_j+1) and F_n is monotone too,
    so the deviation over that cell is bounded by
    max(F_n(g_j+1 -) - F(g_j), F(g_j+1) - F_n(g_j)). ``grid`` must cover the
    sample range; a fine grid makes the bound tight.
    """
    x = np.asarray(sorted_sample, dtype=float)
    g = np.asarray(grid, dtype=float)
    fg = np.asarray(cdf_on_grid, dtype=float)
    if x[0] < g[0] or x[-1] > g[-1]:
        raise DomainError("grid must cover the sample range")
    n = x.size
    fn_right = np.searchsorted(x, g, side="right") / n
    fn_left = np.searchsorted(x, g, side="left") / n
    a = fn_left[1:] - fg[:-1]
    b = fg[1:] - fn_right[:-1]
    return float(max(a.max(), b.max(), 0.0))


def ks_pvalue(d: float, n: int) -> float:
    """Asymptotic two-sided p-value P(K > sqrt(n) d) of the Kolmogorov law.

    Uses 2 sum (-1)^(k-1) exp(-2 k^2 x^2) for x >= 1 and the equivalent theta
    series 1 - sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)) below, where the
    alternating series converges slowly. Terms are summed until under 1e-12.
    """
    if not 0 <= d <= 1:
        raise DomainError(f"d must lie in [0, 1] (got {d})")
    if n < 1:
        raise DomainError("n must be >= 1")
    x = math.sqrt(n) * d
    if x == 0:
        return 1.0
    if x >= 1.0:
        total = 0.0
        k = 1
        while True:
            term = math.exp(-2.0 * k * k * x * x)
            total += term if k % 2 else -term
            if term < 1e-12:
                break
            k += 1
        p = 2.0 * total
    else:
        total = 0.0
        k = 1
        c = math.pi * math.pi / (8.0 * x * x)
        while True:
            term = math.exp(-(2 * k - 1) ** 2 * c)
            total += term
            if term < 1e-12:
                break
            k += 1
        p = 1.0 - _SQRT_2PI / x * total
    return min(max(p, 0.0), 1.0)


def ks_test(sample, cdf: Callable[[float], float]) -> KsResult:
    pts, wts = weighted_points(sample)
    n = int(wts.sum())
    d = ks_statistic(sample, cdf)
    return KsResult(d, ks_pvalue(d, n), n, bool(np.any(wts > 1)))
