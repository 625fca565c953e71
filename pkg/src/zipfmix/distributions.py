"""Zipf, shifted geometric, zero-truncated Poisson and Zipf-PSS laws, plus the
Zipf maximum-likelihood fit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy import optimize
from scipy.special import gammaln
from scipy.special import zeta as hurwitz_zeta

from .errors import DegenerateSample, DomainError, NonFiniteMoment
from .specfun import polylog, riemann_zeta, zeta_and_derivatives

__all__ = [
    "RandomStream",
    "make_stream",
    "ZipfDist",
    "GeometricShifted",
    "ZtpDist",
    "FitResult",
    "log_pmf_slope",
    "ztp_mean",
    "ztp_draws",
    "zipf_pss_sample",
    "zipf_fit_mle",
    "fit_from_counts",
]

RandomStream = np.random.Generator

DEFAULT_SEED = 20240611
INT64_MAX = np.iinfo(np.int64).max

# head of the inverse-transform table used by the direct Zipf sampler
_HEAD = 10_000


def make_stream(seed: int | None = DEFAULT_SEED) -> RandomStream:
    """Seeded PCG64 generator; the same seed always yields the same draws."""
    return np.random.default_rng(seed)


def _as_support(x):
    arr = np.asarray(x)
    if arr.dtype.kind == "f":
        if np.any(arr != np.floor(arr)):
            raise DomainError("support values must be integers")
    if np.any(arr < 1):
        raise DomainError("support is {1, 2, 3, ...}")
    return arr


def _check_scalar_support(x):
    if x < 1 or x != math.floor(x):
        raise DomainError(f"support is {{1, 2, 3, ...}} (got {x})")


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else values


@dataclass(frozen=True)
class ZipfDist:
    """Zipf law P(X = x) = x^-alpha / zeta(alpha) on {1, 2, ...}."""

    alpha: float
    zeta_alpha: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        if not self.alpha > 1:
            raise DomainError(f"Zipf exponent must exceed 1 (got {self.alpha})")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "zeta_alpha", riemann_zeta(self.alpha))

    def log_pmf(self, x):
        arr = _as_support(x).astype(float)
        out = -self.alpha * np.log(arr) - math.log(self.zeta_alpha)
        return _scalar_or_array(out, x)

    def pmf(self, x):
        if np.ndim(x) == 0:
            _check_scalar_support(x)
            return float(x) ** (-self.alpha) / self.zeta_alpha
        arr = _as_support(x).astype(float)
        return arr ** (-self.alpha) / self.zeta_alpha

    def cdf(self, x):
        """P(X <= x). Exact partial sums up to 10^4, Hurwitz-zeta tail beyond."""
        arr = _as_support(x)
        flat = np.atleast_1d(arr).astype(float)
        out = np.empty_like(flat)
        small = flat <= _HEAD
        if np.any(small):
            out[small] = self._head_cdf[flat[small].astype(np.int64) - 1]
        if np.any(~small):
            out[~small] = 1.0 - hurwitz_zeta(self.alpha, flat[~small] + 1.0) / self.zeta_alpha
        out = out.reshape(np.shape(arr))
        return _scalar_or_array(out, x)

    def sf(self, x):
        """P(X > x) without the cancellation of ``1 - cdf``."""
        arr = _as_support(x).astype(float)
        out = hurwitz_zeta(self.alpha, arr + 1.0) / self.zeta_alpha
        return _scalar_or_array(out, x)

    @cached_property
    def _head_cdf(self):
        k = np.arange(1, _HEAD + 1, dtype=float)
        return np.cumsum(k ** (-self.alpha)) / self.zeta_alpha

    def moment(self, k: int) -> float:
        """E[X^k] = zeta(alpha - k) / zeta(alpha), finite only for alpha > k + 1."""
        if int(k) != k or k < 1:
            raise DomainError("moment order must be a positive integer")
        if not self.alpha > k + 1:
            raise NonFiniteMoment(f"E[X^{k}] is infinite for alpha = {self.alpha} <= {k + 1}")
        return riemann_zeta(self.alpha - k) / self.zeta_alpha

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        if not self.alpha > 3:
            raise NonFiniteMoment(f"variance is infinite for alpha = {self.alpha} <= 3")
        z0 = self.zeta_alpha
        z1 = riemann_zeta(self.alpha - 1)
        z2 = riemann_zeta(self.alpha - 2)
        return (z2 * z0 - z1 * z1) / (z0 * z0)

    def pgf(self, z: float) -> float:
        """E[z^X] = Li_alpha(z) / zeta(alpha) for real z <= 1."""
        if z > 1:
            raise DomainError(f"the PGF is evaluated only for z <= 1 (got {z})")
        if z == 1:
            return 1.0
        return polylog(self.alpha, z) / self.zeta_alpha

    def log_likelihood(self, sum_log: float, n: int) -> float:
        return -self.alpha * sum_log - n * math.log(self.zeta_alpha)

    def sample(self, rng: RandomStream, n: int) -> np.ndarray:
        """Draw ``n`` i.i.d. values.

        Inverse transform on the tabulated CDF for x <= 10^4; beyond that a
        rejection sampler with a discretised Pareto proposal. Draws that would
        not fit in int64 (only plausible for alpha very close to 1) are
        returned as the int64 maximum.
        """
        if n < 1:
            raise DomainError("n must be >= 1")
        u = rng.random(n)
        cdf = self._head_cdf
        out = np.searchsorted(cdf, u, side="right").astype(np.int64) + 1
        tail = u >= cdf[-1]
        n_tail = int(np.count_nonzero(tail))
        if n_tail:
            out[tail] = _zipf_tail(self.alpha, _HEAD + 1, rng, n_tail)
        return out


def _zipf_tail(alpha: float, m: int, rng: RandomStream, n: int) -> np.ndarray:
    """Zipf(alpha) conditioned on X >= m, by rejection from floor(Pareto(m))."""
    am1 = alpha - 1.0
    bound = (1.0 + 1.0 / m) ** alpha
    out = np.empty(n, dtype=np.int64)
    todo = np.arange(n)
    while todo.size:
        k = todo.size
        with np.errstate(over="ignore", divide="ignore"):
            y = m * rng.random(k) ** (-1.0 / am1)
        u = rng.random(k)
        huge = ~(y < 2.0**62)
        x = np.floor(np.where(huge, m, y))
        # r(x) = (alpha-1) x^-alpha / (x^(1-alpha) - (x+1)^(1-alpha)), in [1, (1+1/x)^alpha]
        r = am1 / (x * -np.expm1(-am1 * np.log1p(1.0 / x)))
        accept = huge | (u * bound <= r)
        vals = np.where(huge, INT64_MAX, x.astype(np.int64))
        out[todo[accept]] = vals[accept]
        todo = todo[~accept]
    return out


def log_pmf_slope(d: ZipfDist, x1: int, x2: int) -> float:
    """Slope of log P(X = x) against log x between two support points."""
    if x1 == x2:
        raise DomainError("need two distinct support points")
    return (d.log_pmf(x2) - d.log_pmf(x1)) / (math.log(x2) - math.log(x1))


@dataclass(frozen=True)
class GeometricShifted:
    """Geometric law on {1, 2, ...} with success probability p = 1 - exp(-s)."""

    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError(f"s must be positive (got {self.s})")

    @property
    def p(self) -> float:
        return -math.expm1(-self.s)

    def pmf(self, x):
        if np.ndim(x) == 0:
            _check_scalar_support(x)
            return math.exp(-self.s * (x - 1)) * -math.expm1(-self.s)
        arr = _as_support(x).astype(float)
        return np.exp(-self.s * (arr - 1.0)) * (-math.expm1(-self.s))

    def pgf(self, z: float) -> float:
        """(e^s - 1) z / (e^s - z), evaluated as p z / (1 - q z) to avoid overflow."""
        if self.s < 700 and z >= math.exp(self.s):
            raise DomainError(f"PGF has a pole at z = e^s = {math.exp(self.s)}")
        q = math.exp(-self.s)
        return -math.expm1(-self.s) * z / (1.0 - q * z)

    def sample(self, rng: RandomStream, n: int) -> np.ndarray:
        return rng.geometric(self.p, size=n).astype(np.int64)


def ztp_mean(lam):
    """Mean lam / (1 - exp(-lam)) of the zero-truncated Poisson; 1 at lam = 0."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0):
        raise DomainError("lambda must be >= 0")
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(lam_arr > 0, lam_arr / -np.expm1(-lam_arr), 1.0)
    return float(out) if np.ndim(lam) == 0 else out


@dataclass(frozen=True)
class ZtpDist:
    """Zero-truncated Poisson; ``lam = 0`` is the point mass at one."""

    lam: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise DomainError(f"lambda must be >= 0 (got {self.lam})")

    def log_pmf(self, x):
        if np.ndim(x) == 0:
            _check_scalar_support(x)
            if self.lam == 0:
                return 0.0 if x == 1 else -math.inf
            lam = self.lam
            return x * math.log(lam) - lam - math.lgamma(x + 1) - math.log(-math.expm1(-lam))
        arr = _as_support(x).astype(float)
        if self.lam == 0:
            out = np.where(arr == 1, 0.0, -np.inf)
        else:
            lam = self.lam
            out = arr * math.log(lam) - lam - gammaln(arr + 1.0) - math.log(-math.expm1(-lam))
        return _scalar_or_array(out, x)

    def pmf(self, x):
        if np.ndim(x) == 0:
            return math.exp(self.log_pmf(x))
        return np.exp(self.log_pmf(x))

    def pgf(self, z: float) -> float:
        """(e^(lam z) - 1) / (e^lam - 1); the identity map when lam = 0."""
        lam = self.lam
        if lam == 0:
            return float(z)
        if lam < 700:
            return math.expm1(lam * z) / math.expm1(lam)
        # divide through by e^lam
        if z >= 0:
            return math.exp(lam * (z - 1.0)) * -math.expm1(-lam * z) / -math.expm1(-lam)
        return math.expm1(lam * z) * math.exp(-lam) / -math.expm1(-lam)

    def mean(self) -> float:
        return ztp_mean(self.lam)

    def sample(self, rng: RandomStream, n: int) -> np.ndarray:
        return ztp_draws(rng, np.full(n, float(self.lam)))


def ztp_draws(rng: RandomStream, lam) -> np.ndarray:
    """One zero-truncated Poisson draw per entry of ``lam``.

    Conditioning a unit-rate Poisson process on [0, lam] to have a point: the
    first arrival T is exponential truncated to (0, lam) and the rest of the
    points form a Poisson(lam - T) count, so X = 1 + Poisson(lam - T).
    """
    lam = np.asarray(lam, dtype=float)
    u = rng.random(lam.shape)
    first = -np.log1p(u * np.expm1(-lam))
    rest = np.clip(lam - first, 0.0, None)
    return 1 + rng.poisson(rest).astype(np.int64)


def zipf_pss_sample(alpha: float, lam: float, rng: RandomStream, n: int) -> np.ndarray:
    """Zipf-Poisson stopped sum: N ~ Poisson(lam), then the sum of N Zipf draws."""
    if not lam > 0:
        raise DomainError("lambda must be positive")
    d = ZipfDist(alpha)
    counts = rng.poisson(lam, size=n)
    total = int(counts.sum())
    out = np.zeros(n, dtype=np.int64)
    if total:
        draws = d.sample(rng, total)
        owner = np.repeat(np.arange(n), counts)
        np.add.at(out, owner, draws)
    return out


@dataclass(frozen=True)
class FitResult:
    alpha_hat: float
    ci_low: float
    ci_high: float
    log_likelihood: float
    n: int

    def as_dict(self):
        return {
            "alpha_hat": self.alpha_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "log_likelihood": self.log_likelihood,
            "n": self.n,
        }


_ALPHA_LO = 1.0 + 1e-6
_ALPHA_HI = 100.0


def _neg_log_zeta_slope(alpha: float) -> float:
    z, dz = zeta_and_derivatives(alpha, 1)
    return -dz / z


def fit_from_counts(values: Iterable[int], weights: Iterable[int] | None = None) -> FitResult:
    """Zipf MLE from observations ``values`` (optionally with multiplicities).

    Solves -zeta'(a)/zeta(a) = mean(log x) by Brent's method on a bracket in
    (1, 100]. The 95% interval is Wald's, using the Fisher information
    Var[log X] = zeta''/zeta - (zeta'/zeta)^2 at the estimate.
    """
    v = np.asarray(list(values), dtype=float)
    w = np.ones_like(v) if weights is None else np.asarray(list(weights), dtype=float)
    if v.size == 0 or v.shape != w.shape:
        raise DomainError("need a nonempty sample with matching weights")
    if np.any(v < 1) or np.any(w < 0):
        raise DomainError("values must be >= 1 and weights nonnegative")
    n = int(round(math.fsum(w)))
    if n < 1:
        raise DomainError("total weight must be positive")
    sum_log = math.fsum(w * np.log(v))
    if sum_log == 0:
        raise DegenerateSample("every observation equals 1; the MLE diverges")
    target = sum_log / n

    def resid(a):
        return _neg_log_zeta_slope(a) - target

    if resid(_ALPHA_HI) > 0:
        raise DegenerateSample(f"mean log {target:g} is too small to bracket the MLE")
    if resid(_ALPHA_LO) < 0:
        raise DomainError(f"mean log {target:g} too large; estimate would be below 1")
    alpha_hat = optimize.brentq(resid, _ALPHA_LO, _ALPHA_HI, xtol=1e-14, rtol=4 * np.finfo(float).eps)

    z, dz, d2z = zeta_and_derivatives(alpha_hat, 2)
    info = d2z / z - (dz / z) ** 2
    half = 1.959963984540054 / math.sqrt(n * info)
    ci_low = max(alpha_hat - half, math.nextafter(1.0, 2.0))
    ci_high = alpha_hat + half
    loglik = -alpha_hat * sum_log - n * math.log(z)
    return FitResult(float(alpha_hat), float(ci_low), float(ci_high), float(loglik), n)


def zipf_fit_mle(table) -> FitResult:
    """Fit a Zipf law to a frequency-of-frequencies table.

    ``table`` is anything with a ``rows`` attribute of ``(value, count)``
    pairs, or an iterable of such pairs.
    """
    rows = list(getattr(table, "rows", table))
    if not rows:
        raise DomainError("empty table")
    values, counts = zip(*rows)
    return fit_from_counts(values, counts)
