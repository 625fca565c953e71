"""Mixing laws that turn geometric and zero-truncated Poisson components into
a Zipf law, their samplers, and numerical checks of the mixture identities.

Two hierarchies are implemented:

* S ~ MixingS(alpha), X | S ~ GeometricShifted(S)         gives X ~ Zipf(alpha)
* lam ~ MixingLambda(alpha), X | lam ~ ZtpDist(lam)       gives X ~ Zipf(alpha)

and the second one factors through the first: lam | S is the sum of an
Exp(e^S - 1) and an Exp(e^S) variable.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.special import bernoulli, gammaincc

from .distributions import GeometricShifted, RandomStream, ZipfDist, ZtpDist, ztp_draws
from .errors import DomainError, NonConvergence
from .specfun import QuadratureConfig, integrate, polylog_integral

__all__ = [
    "MixingS",
    "MixingLambdaGivenS",
    "MixingLambda",
    "IdentityReport",
    "verify_theorem1",
    "verify_theorem2",
    "verify_pgf_mixtures",
    "check_not_ztmp",
    "ztp_identity_default_tol",
    "sample_via_geometric",
    "sample_via_ztp",
]

# inner integrals feed outer quadratures, so they are held tighter
_INNER = QuadratureConfig(abs_tol=1e-300, rel_tol=1e-11, max_refinements=200)
_OUTER = QuadratureConfig(abs_tol=1e-300, rel_tol=1e-10, max_refinements=200)


_SERIES_MAX_TERMS = 2_000_000
# B_1 = -1/2 in this convention, matching s/(e^s - 1)
_BERN_SMALL = [float(b) for b in bernoulli(40)]


def _log_expm1(s: float) -> float:
    return math.log(math.expm1(s)) if s < 30 else s + math.log1p(-math.exp(-s))


class MixingS:
    """Density s^(a-1) / ((e^s - 1) zeta(a) Gamma(a)) on s > 0.

    Expanding 1/(e^s - 1) = sum_x e^(-s x) shows it is the Zipf(a)-weighted
    mixture of Gamma(shape a, rate x) densities, which gives both the sampler
    and an independent series for the CDF.
    """

    def __init__(self, alpha: float):
        self.zipf = ZipfDist(alpha)
        self.alpha = self.zipf.alpha
        self._log_norm = math.log(self.zipf.zeta_alpha) + math.lgamma(self.alpha)

    def __repr__(self):
        return f"MixingS(alpha={self.alpha!r})"

    def logpdf(self, s: float) -> float:
        if not s > 0:
            raise DomainError(f"s must be positive (got {s})")
        return (self.alpha - 1.0) * math.log(s) - _log_expm1(s) - self._log_norm

    def pdf(self, s: float) -> float:
        return math.exp(self.logpdf(s))

    def pdf_p(self, p: float) -> float:
        """Density of p = 1 - e^-s, i.e. pdf(s(p)) * ds/dp with ds/dp = 1/(1 - p)."""
        if not 0 < p < 1:
            raise DomainError("p must lie in (0, 1)")
        s = -math.log1p(-p)
        return self.pdf(s) / (1.0 - p)

    def cdf(self, s0: float, cfg: QuadratureConfig | None = None) -> float:
        """Integral of the density over (0, s0]."""
        if s0 < 0:
            raise DomainError("s0 must be >= 0")
        if s0 == 0:
            return 0.0
        if s0 == math.inf:
            return 1.0
        res = integrate(self.pdf, 0.0, s0, cfg or _OUTER, points=[min(1.0, s0 / 2)])
        if not res.converged:
            raise NonConvergence(f"MixingS cdf at {s0}: error {res.error_estimate:g}")
        return min(res.value, 1.0)

    def cdf_series(self, s0: float) -> float:
        """Same CDF as 1 - sum_x P(X = x) Q(a, x s0), Q the upper regularized gamma."""
        if s0 < 0:
            raise DomainError("s0 must be >= 0")
        if s0 == 0:
            return 0.0
        if s0 == math.inf:
            return 1.0
        a = self.alpha
        # Q(a, y) is negligible once y exceeds a by ~ 60 + 10 sqrt(a)
        x_max = int(math.ceil((a + 60.0 + 10.0 * math.sqrt(a)) / s0)) + 1
        if x_max > _SERIES_MAX_TERMS:
            return self._cdf_small(s0)
        x = np.arange(1, x_max + 1, dtype=float)
        terms = self.zipf.pmf(x) * gammaincc(a, x * s0)
        return 1.0 - math.fsum(terms)

    def _cdf_small(self, s0: float) -> float:
        # s/(e^s - 1) = sum_k B_k s^k / k!  (|s| < 2 pi), integrated term by term
        a = self.alpha
        if not s0 < 1.0:
            raise DomainError("small-s expansion used only for s0 < 1")
        terms = [
            _BERN_SMALL[k] / math.factorial(k) * math.exp((a - 1.0 + k) * math.log(s0)) / (a - 1.0 + k)
            for k in range(len(_BERN_SMALL))
        ]
        return math.fsum(terms) * math.exp(-self._log_norm)

    def sample(self, rng: RandomStream, n: int | None = None):
        """X ~ Zipf(a), then S ~ Gamma(shape a, rate X)."""
        size = 1 if n is None else n
        x = self.zipf.sample(rng, size).astype(float)
        s = rng.gamma(self.alpha, 1.0 / x)
        return float(s[0]) if n is None else s


class MixingLambdaGivenS:
    """Conditional density e^s (e^s - 1) e^(-lam e^s) (e^lam - 1) of lam given s.

    Algebraically this is e^s (e^s - 1) (e^(-lam (e^s - 1)) - e^(-lam e^s)),
    the law of Exp(rate e^s - 1) + Exp(rate e^s).
    """

    def __init__(self, s: float):
        if not s > 0:
            raise DomainError(f"s must be positive (got {s})")
        self.s = float(s)
        self._log_a = _log_expm1(self.s)

    def __repr__(self):
        return f"MixingLambdaGivenS(s={self.s!r})"

    def pdf(self, lam: float) -> float:
        if not lam > 0:
            raise DomainError(f"lambda must be positive (got {lam})")
        la = self._log_a
        expo = la + math.log(lam)
        if expo > 700:
            return 0.0
        return math.exp(self.s + la - math.exp(expo)) * -math.expm1(-lam)

    def cdf(self, lam0: float) -> float:
        return _hypoexp_cdf(lam0, self.s)

    def sample(self, rng: RandomStream, n: int | None = None):
        size = 1 if n is None else n
        s = np.full(size, self.s)
        out = _lambda_given_s(rng, s)
        return float(out[0]) if n is None else out


def _hypoexp_cdf(lam0: float, s: float) -> float:
    """P(lam <= lam0 | s) = 1 - e^s e^(-(e^s-1) lam0) + (e^s - 1) e^(-e^s lam0).

    Rearranged as -expm1(-a lam0) + a e^(-a lam0) expm1(-lam0), a = e^s - 1,
    which keeps the small-lam0 cancellation in check.
    """
    if lam0 <= 0:
        return 0.0
    if lam0 == math.inf:
        return 1.0
    la = _log_expm1(s)
    expo = la + math.log(lam0)
    if expo > 700:
        return 1.0
    a_lam = math.exp(expo)
    return -math.expm1(-a_lam) + math.exp(la - a_lam) * math.expm1(-lam0)


def _lambda_given_s(rng: RandomStream, s: np.ndarray) -> np.ndarray:
    e1 = rng.standard_exponential(s.shape)
    e2 = rng.standard_exponential(s.shape)
    with np.errstate(over="ignore"):
        return e1 / np.expm1(s) + e2 * np.exp(-s)


class MixingLambda:
    """Mixing density of lam that makes the zero-truncated Poisson mixture Zipf:

        f(lam) = (e^lam - 1) I(lam) / (Gamma(a) zeta(a)),
        I(lam) = int_0^inf exp(s - lam e^s) s^(a-1) ds.

    With u = lam e^s and v = u - lam the inner integral becomes
    I(lam) = e^-lam / lam * J(lam), J(lam) = int_0^inf e^-v log1p(v/lam)^(a-1) dv,
    which is well conditioned for small and large lam alike.
    """

    def __init__(self, alpha: float):
        self.mix_s = MixingS(alpha)
        self.alpha = self.mix_s.alpha
        self._log_norm = self.mix_s._log_norm

    def __repr__(self):
        return f"MixingLambda(alpha={self.alpha!r})"

    def _j(self, lam: float) -> float:
        am1 = self.alpha - 1.0

        def integrand(v):
            return math.exp(-v) * math.log1p(v / lam) ** am1

        # log1p(v/lam) is log-linear in v over [lam, 1]; one breakpoint per decade
        pts = [1.0, 40.0]
        if lam < 1.0:
            pts += list(np.geomspace(lam, 1.0, int(math.ceil(-math.log10(lam))) + 1)[:-1])
        res = integrate(integrand, 0.0, math.inf, _INNER, points=pts)
        if not res.converged:
            raise NonConvergence(
                f"inner integral at lambda={lam}, alpha={self.alpha}: error {res.error_estimate:g}"
            )
        return res.value

    def inner_integral(self, lam: float) -> float:
        """I(lam) = int_0^inf exp(s - lam e^s) s^(a-1) ds."""
        if not lam > 0:
            raise DomainError(f"lambda must be positive (got {lam})")
        return math.exp(-lam) / lam * self._j(lam)

    def pdf(self, lam: float) -> float:
        if not lam > 0:
            raise DomainError(f"lambda must be positive (got {lam})")
        # (e^lam - 1) e^-lam / lam = -expm1(-lam) / lam
        return -math.expm1(-lam) / lam * self._j(lam) * math.exp(-self._log_norm)

    def cdf(self, lam0: float, cfg: QuadratureConfig | None = None) -> float:
        """F(lam0) = int f(s; a) P(lam <= lam0 | s) ds, a single quadrature over s."""
        if lam0 < 0:
            raise DomainError("lambda0 must be >= 0")
        if lam0 == 0:
            return 0.0
        if lam0 == math.inf:
            return 1.0
        pdf_s = self.mix_s.pdf

        def integrand(s):
            return pdf_s(s) * _hypoexp_cdf(lam0, s)

        knee = math.log1p(1.0 / lam0)
        res = integrate(integrand, 0.0, math.inf, cfg or _OUTER, points=[knee, 1.0, knee + 5.0])
        if not res.converged:
            raise NonConvergence(f"MixingLambda cdf at {lam0}: error {res.error_estimate:g}")
        return min(max(res.value, 0.0), 1.0)

    def sample(self, rng: RandomStream, n: int | None = None):
        """S ~ MixingS(a), then lam = E1 / (e^S - 1) + E2 / e^S."""
        size = 1 if n is None else n
        s = self.mix_s.sample(rng, size)
        out = _lambda_given_s(rng, s)
        return float(out[0]) if n is None else out


def sample_via_geometric(alpha: float, rng: RandomStream, n: int) -> np.ndarray:
    """Zipf draws generated as S ~ MixingS(alpha), X | S ~ GeometricShifted(S)."""
    s = MixingS(alpha).sample(rng, n)
    return rng.geometric(-np.expm1(-s)).astype(np.int64)


def sample_via_ztp(alpha: float, rng: RandomStream, n: int) -> np.ndarray:
    """Zipf draws generated as lam ~ MixingLambda(alpha), X | lam ~ ZTP(lam)."""
    lam = MixingLambda(alpha).sample(rng, n)
    return ztp_draws(rng, lam)


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------


@dataclass
class IdentityReport:
    name: str
    alpha: float
    max_abs_error: float
    max_rel_error: float
    grid_description: str
    tol: float
    passed: bool
    converged: bool = True
    detail: str = ""

    def as_dict(self):
        return asdict(self)


def _quad_cfg_for(tol: float) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=1e-300, rel_tol=max(tol / 100.0, 1e-300), max_refinements=200)


class _ErrorTally:
    def __init__(self):
        self.max_abs = 0.0
        self.max_rel = 0.0
        self.converged = True

    def add(self, lhs, rhs, converged=True):
        diff = abs(lhs - rhs)
        rel = diff / abs(rhs) if rhs != 0 else (0.0 if diff == 0 else math.inf)
        self.max_abs = max(self.max_abs, diff)
        self.max_rel = max(self.max_rel, rel)
        self.converged = self.converged and converged

    def report(self, name, alpha, grid, tol):
        passed = self.converged and self.max_rel <= tol
        return IdentityReport(name, alpha, self.max_abs, self.max_rel, grid, tol, passed, self.converged)


def verify_theorem1(alpha: float, x_max: int = 200, tol: float = 1e-8) -> IdentityReport:
    """Check int_0^inf P_geom(x | s) f(s; a) ds = x^-a / zeta(a) for x = 1..x_max.

    The integrand peaks near s = (a - 1)/x, so each x is integrated in t = s x.
    """
    mix = MixingS(alpha)
    zipf = mix.zipf
    cfg = _quad_cfg_for(tol)
    tally = _ErrorTally()
    for x in range(1, x_max + 1):

        def integrand(t, x=x):
            s = t / x
            return GeometricShifted(s).pmf(x) * mix.pdf(s) / x

        res = integrate(integrand, 0.0, math.inf, cfg, points=[max(alpha - 1.0, 0.5), alpha + 20.0])
        tally.add(res.value, zipf.pmf(x), res.converged)
    return tally.report("geometric-mixture-pmf", mix.alpha, f"x=1..{x_max}", tol)


def ztp_identity_default_tol(alpha: float) -> float:
    """Relative tolerance for the ZTP-mixture check; looser for heavy tails."""
    return 1e-5 if alpha < 1.25 else 1e-6


def verify_theorem2(alpha: float, x_max: int = 50, tol: float | None = None) -> IdentityReport:
    """Check int_0^inf P_ztp(x | lam) f(lam; a) dlam = x^-a / zeta(a) for x = 1..x_max.

    Both layers are adaptive; the outer integral is cut at lam = 1, x and a few
    standard deviations past x, where the ZTP kernel lives.
    """
    tol = ztp_identity_default_tol(alpha) if tol is None else tol
    mix = MixingLambda(alpha)
    zipf = mix.mix_s.zipf
    cfg = _quad_cfg_for(tol)
    tally = _ErrorTally()
    cache: dict[float, float] = {}

    def f_lam(lam):
        val = cache.get(lam)
        if val is None:
            val = cache[lam] = mix.pdf(lam)
        return val

    for x in range(1, x_max + 1):

        def integrand(lam, x=x):
            return ZtpDist(lam).pmf(x) * f_lam(lam)

        pts = [1.0, float(x), x + 10.0 * math.sqrt(x) + 20.0]
        try:
            res = integrate(integrand, 0.0, math.inf, cfg, points=pts)
        except NonConvergence:
            tally.add(math.nan, zipf.pmf(x), False)
            continue
        tally.add(res.value, zipf.pmf(x), res.converged)
    return tally.report("ztp-mixture-pmf", mix.alpha, f"x=1..{x_max}", tol)


def verify_pgf_mixtures(
    alpha: float,
    z_grid: Sequence[float] = (-0.5, 0.3, 0.9),
    tol: float = 1e-7,
    s_grid: Sequence[float] = (0.1, 1.0, 3.0),
) -> IdentityReport:
    """Check both PGF-level identities on ``z_grid``.

    * int geom_pgf(s, z) f(s; a) ds = Li_a(z) / zeta(a)
    * int ztp_pgf(lam, z) f*(lam; s) dlam = geom_pgf(s, z) for each s in ``s_grid``
    """
    if any(not z < 1 for z in z_grid):
        raise DomainError("all z must be < 1")
    mix = MixingS(alpha)
    zipf = mix.zipf
    cfg = _quad_cfg_for(tol)
    tally = _ErrorTally()
    for z in z_grid:

        def outer(s, z=z):
            return GeometricShifted(s).pgf(z) * mix.pdf(s)

        res = integrate(outer, 0.0, math.inf, cfg, points=[1.0, alpha + 10.0])
        tally.add(res.value, zipf.pgf(z), res.converged)

        for s in s_grid:
            cond = MixingLambdaGivenS(s)

            def inner(lam, z=z, cond=cond):
                return ZtpDist(lam).pgf(z) * cond.pdf(lam)

            scale = 1.0 / math.expm1(s)
            res = integrate(inner, 0.0, math.inf, cfg, points=[scale, 10.0 * scale + 10.0])
            tally.add(res.value, GeometricShifted(s).pgf(z), res.converged)
    grid = f"z={list(z_grid)}; s={list(s_grid)}"
    return tally.report("pgf-mixtures", mix.alpha, grid, tol)


def check_not_ztmp(alpha: float, z_values: Sequence[float]) -> list[float]:
    """h(z) = Li_a(z) / zeta(a) along negative z, from the integral form.

    A zero-truncated mixed Poisson PGF must tend to a finite negative limit as
    z -> -inf; for the Zipf PGF these values keep decreasing without bound.
    """
    zs = list(z_values)
    if any(not z < 0 for z in zs):
        raise DomainError("all z must be negative")
    if any(b >= a for a, b in zip(zs, zs[1:])):
        raise DomainError("z values must be strictly decreasing")
    zipf = ZipfDist(alpha)
    out = []
    for z in zs:
        res = polylog_integral(zipf.alpha, z)
        if not res.converged:
            raise NonConvergence(f"polylog integral at z={z}: error {res.error_estimate:g}")
        out.append(res.value / zipf.zeta_alpha)
    return out
