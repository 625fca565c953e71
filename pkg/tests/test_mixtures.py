import math

import numpy as np
import pytest
from scipy import integrate as spi
from scipy import stats

from zipfmix.distributions import GeometricShifted, ZipfDist, ZtpDist, make_stream
from zipfmix.errors import DomainError
from zipfmix.gof import ks_statistic_bound
from zipfmix.mixtures import (
    IdentityReport,
    MixingLambda,
    MixingLambdaGivenS,
    MixingS,
    check_not_ztmp,
    sample_via_geometric,
    sample_via_ztp,
    ztp_identity_default_tol,
    verify_pgf_mixtures,
    verify_theorem1,
    verify_theorem2,
)
from zipfmix.specfun import riemann_zeta

# mpmath at 20 digits
MIXING_S_PDF = [(1.5, 0.1, 1.2987447868542336), (2.0, 1.0, 0.35379941275362), (3.5, 2.0, 0.23645076898822592), (5.0, 7.0, 0.088057682543273662)]
MIXING_S_CDF = [(1.5, 0.5, 0.56248504720020523), (2.0, 1.0, 0.47266613889393446), (3.5, 3.0, 0.51283722586543435), (5.0, 0.2, 1.4822972757464947e-5)]
# double integral over s of f(s) times the hypoexponential density, mpmath
MIXING_LAMBDA_PDF = [
    (1.5, 0.5, 0.30686384890059613),
    (2.0, 1.0, 0.22916628424502998),
    (3.5, 0.1, 2.0133951765101374),
    (5.0, 3.0, 0.00058762692486322133),
    (1.1, 2.0, 0.037338333515082352),
]
MIXING_LAMBDA_CDF = [(2.0, 0.5, 0.44797628965309283), (3.5, 2.0, 0.97633971198452481), (1.5, 10.0, 0.76071430895572449)]

FIG_ALPHAS = [1.1, 1.5, 2.0, 3.5, 5.0]


# --- MixingS ------------------------------------------------------------------


@pytest.mark.parametrize("alpha,s,expected", MIXING_S_PDF)
def test_mixing_s_pdf_oracle(alpha, s, expected):
    assert MixingS(alpha).pdf(s) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("alpha,s,expected", MIXING_S_CDF)
def test_mixing_s_cdf_oracle(alpha, s, expected):
    m = MixingS(alpha)
    assert m.cdf(s) == pytest.approx(expected, rel=1e-10)
    assert m.cdf_series(s) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("alpha", [1.05, 2.0, 6.0])
def test_mixing_s_series_small_s_route(alpha):
    m = MixingS(alpha)
    # s0 this small needs far more than two million series terms
    s0 = 1e-6
    assert m.cdf_series(s0) == pytest.approx(m.cdf(s0), rel=1e-9)


def test_mixing_s_is_gamma_mixture():
    # f(s) = sum_x P(X = x) Gamma(a, rate x).pdf(s), truncated with a tiny tail
    alpha, s = 2.5, 0.7
    x = np.arange(1, 200)
    mix = np.sum(ZipfDist(alpha).pmf(x) * stats.gamma.pdf(s, alpha, scale=1.0 / x))
    assert MixingS(alpha).pdf(s) == pytest.approx(mix, rel=1e-12)


def test_mixing_s_pdf_p_jacobian():
    m = MixingS(2.0)
    val, _ = spi.quad(m.pdf_p, 0.0, 1.0, limit=200)
    assert val == pytest.approx(1.0, abs=1e-8)
    p = 0.4
    assert m.pdf_p(p) == pytest.approx(m.pdf(-math.log(1 - p)) / (1 - p))
    with pytest.raises(DomainError):
        m.pdf_p(1.0)


def test_mixing_s_domain():
    with pytest.raises(DomainError):
        MixingS(2.0).pdf(0.0)
    with pytest.raises(DomainError):
        MixingS(2.0).cdf(-1.0)
    assert MixingS(2.0).cdf(0.0) == 0.0
    assert MixingS(2.0).cdf(math.inf) == 1.0


@pytest.mark.parametrize("alpha", [1.5, 3.5])
def test_mixing_s_sampler_ks(alpha):
    m = MixingS(alpha)
    x = np.sort(m.sample(make_stream(21), 50_000))
    # sample quantiles make every grid cell carry little probability
    grid = np.unique(np.r_[x[0] / 2, x[::25], x[-1] * 1.01])
    f = np.array([m.cdf_series(g) for g in grid])
    # KS bound below the 0.1% critical value
    assert ks_statistic_bound(x, f, grid) < 1.95 / math.sqrt(x.size)


def test_mixing_s_scalar_sample():
    assert isinstance(MixingS(2.0).sample(make_stream(1)), float)


# --- MixingLambdaGivenS -----------------------------------------------------


@pytest.mark.parametrize("s", [0.05, 1.0, 4.0])
def test_conditional_is_hypoexponential(s):
    c = MixingLambdaGivenS(s)
    r1, r2 = math.expm1(s), math.exp(s)
    for lam in (0.01, 0.3, 2.0):
        direct = r1 * r2 / (r2 - r1) * (math.exp(-r1 * lam) - math.exp(-r2 * lam))
        assert c.pdf(lam) == pytest.approx(direct, rel=1e-10)
        cdf, _ = spi.quad(c.pdf, 0.0, lam, epsrel=1e-12)
        assert c.cdf(lam) == pytest.approx(cdf, rel=1e-9)


def test_conditional_sampler_moments():
    s = 0.8
    lam = MixingLambdaGivenS(s).sample(make_stream(8), 200_000)
    mean = 1 / math.expm1(s) + math.exp(-s)
    assert lam.mean() == pytest.approx(mean, rel=0.01)


# --- MixingLambda -----------------------------------------------------------


@pytest.mark.parametrize("alpha,lam,expected", MIXING_LAMBDA_PDF)
def test_mixing_lambda_pdf_oracle(alpha, lam, expected):
    assert MixingLambda(alpha).pdf(lam) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("alpha,lam,expected", MIXING_LAMBDA_CDF)
def test_mixing_lambda_cdf_oracle(alpha, lam, expected):
    assert MixingLambda(alpha).cdf(lam) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("alpha,lam", [(2.0, 0.5), (3.5, 0.05), (1.5, 4.0)])
def test_inner_integral_against_fixed_grid(alpha, lam):
    # I(lam) = int exp(s - lam e^s) s^(a-1) ds, composite Simpson in u = sqrt(s)
    u = np.linspace(0.0, math.sqrt(12.0), 400_001)
    s = u * u
    y = np.exp(s - lam * np.exp(s)) * u ** (2 * alpha - 1) * 2.0
    grid = spi.simpson(y, x=u)
    assert MixingLambda(alpha).inner_integral(lam) == pytest.approx(grid, rel=1e-7)


@pytest.mark.parametrize("alpha", [1.5, 2.5])
def test_mixing_lambda_cdf_against_double_integral(alpha):
    # naive route: integrate the pdf itself
    m = MixingLambda(alpha)
    lam0 = 1.3
    val, _ = spi.quad(m.pdf, 0.0, lam0, points=[0.01, 0.1, 1.0], limit=200, epsrel=1e-11)
    assert m.cdf(lam0) == pytest.approx(val, rel=1e-8)


def test_mixing_lambda_small_lambda_regression():
    # near zero the inner integral grows like log(1/lam)
    m = MixingLambda(2.0)
    vals = [m.pdf(lam) for lam in (1e-8, 1e-4, 1e-2)]
    assert all(np.isfinite(vals))
    assert vals[0] > vals[1] > vals[2]
    # alpha = 2: J(lam) = int e^-v log1p(v/lam) dv = e^lam E1(lam)
    from scipy.special import exp1

    for lam, v in zip((1e-8, 1e-4, 1e-2), vals):
        exact = -math.expm1(-lam) / lam * math.exp(lam) * exp1(lam) / riemann_zeta(2.0)
        assert v == pytest.approx(exact, rel=1e-9)


@pytest.mark.parametrize("alpha", FIG_ALPHAS)
def test_mixing_lambda_cdf_limits(alpha):
    m = MixingLambda(alpha)
    assert m.cdf(0.0) == 0.0
    assert m.cdf(math.inf) == 1.0
    vals = [m.cdf(x) for x in (1e-6, 0.1, 1.0, 10.0, 1e3)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_mixing_lambda_sampler_ks():
    m = MixingLambda(2.0)
    x = np.sort(m.sample(make_stream(13), 20_000))
    grid = np.unique(np.r_[x[0] / 2, x[::40], x[-1] * 1.01])
    f = np.array([m.cdf(g) for g in grid])
    assert ks_statistic_bound(x, f, grid) < 1.95 / math.sqrt(x.size)


# --- composite samplers -----------------------------------------------------


@pytest.mark.parametrize("sampler", [sample_via_geometric, sample_via_ztp])
def test_composite_samplers_are_zipf(sampler):
    alpha = 2.5
    d = ZipfDist(alpha)
    x = sampler(alpha, make_stream(17), 100_000)
    cells = np.arange(1, 21)
    obs = np.r_[[np.count_nonzero(x == c) for c in cells], np.count_nonzero(x > 20)]
    exp = np.r_[d.pmf(cells), d.sf(20)] * x.size
    _, p = stats.chisquare(obs, exp)
    assert p > 1e-3
    assert x.dtype == np.int64


# --- identity checks --------------------------------------------------------


@pytest.mark.parametrize("alpha", [1.5, 4.0])
def test_verify_geometric_identity_small_grid(alpha):
    rep = verify_theorem1(alpha, x_max=30)
    assert isinstance(rep, IdentityReport)
    assert rep.passed and rep.converged
    assert rep.max_rel_error < 1e-10


def test_geometric_identity_direct_composition():
    # independent of the package quadrature: scipy quad on s directly
    alpha, x = 2.0, 3
    m = MixingS(alpha)
    val, _ = spi.quad(lambda s: GeometricShifted(s).pmf(x) * m.pdf(s), 0, np.inf, epsrel=1e-12, limit=200)
    assert val == pytest.approx(ZipfDist(alpha).pmf(x), rel=1e-9)


def test_verify_ztp_identity_small_grid():
    rep = verify_theorem2(2.0, x_max=6)
    assert rep.passed and rep.tol == 1e-6


def test_ztp_identity_direct_composition():
    alpha, x = 3.5, 2
    m = MixingLambda(alpha)
    val, _ = spi.quad(lambda lam: ZtpDist(lam).pmf(x) * m.pdf(lam), 0, np.inf, points=None, epsrel=1e-10, limit=200)
    assert val == pytest.approx(ZipfDist(alpha).pmf(x), rel=1e-7)


def test_ztp_identity_tolerance_rule():
    assert ztp_identity_default_tol(1.1) == 1e-5
    assert ztp_identity_default_tol(1.5) == 1e-6


def test_verify_reports_nonconvergence_or_failure_at_absurd_tol():
    rep = verify_theorem1(2.0, x_max=3, tol=1e-30)
    assert not rep.passed


def test_verify_pgf():
    rep = verify_pgf_mixtures(3.5)
    assert rep.passed
    assert rep.max_rel_error < 1e-10
    with pytest.raises(DomainError):
        verify_pgf_mixtures(2.0, z_grid=(1.5,))


def test_not_ztmp_values():
    z = [-10.0, -1e3, -1e6]
    h = check_not_ztmp(2.0, z)
    # Li_2 at these points from mpmath, divided by pi^2/6
    expected = [-4.1982778868581038579, -25.50247581388996883, -97.079099055459640626]
    for got, li in zip(h, expected):
        assert got == pytest.approx(li / (math.pi**2 / 6), rel=1e-9)
    assert h[0] > h[1] > h[2]


def test_not_ztmp_input_checks():
    with pytest.raises(DomainError):
        check_not_ztmp(2.0, [-1.0, -0.5])
    with pytest.raises(DomainError):
        check_not_ztmp(2.0, [0.5])


def test_identity_report_as_dict():
    rep = IdentityReport("x", 2.0, 0.0, 0.0, "g", 1e-8, True)
    d = rep.as_dict()
    assert d["name"] == "x" and d["converged"] is True and d["detail"] == ""
