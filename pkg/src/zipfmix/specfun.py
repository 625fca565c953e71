"""Special functions and quadrature: zeta (with alpha-derivatives), polylog,
gamma, and an adaptive integrator for semi-infinite domains.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate as _sp_integrate
from scipy.special import bernoulli

from .errors import DomainError, NonConvergence

__all__ = [
    "QuadratureConfig",
    "QuadResult",
    "DEFAULT_QUAD",
    "riemann_zeta",
    "zeta_derivative",
    "zeta_and_derivatives",
    "polylog",
    "polylog_series",
    "polylog_integral",
    "gamma_fn",
    "integrate",
]


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_refinements: int = 60

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_refinements) < 1:
            raise DomainError("max_refinements must be >= 1")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    converged: bool

    def __float__(self):
        return float(self.value)


DEFAULT_QUAD = QuadratureConfig()


def integrate(
    fn: Callable[[float], float],
    lower: float,
    upper: float,
    cfg: QuadratureConfig | None = None,
    points: Sequence[float] | None = None,
) -> QuadResult:
    """Adaptive Gauss-Kronrod integration of ``fn`` over ``[lower, upper]``.

    ``upper`` may be ``math.inf``. The interval is cut at ``points`` (those
    strictly inside it) and each piece is integrated separately; an infinite
    last piece goes through QUADPACK's ``t -> (1 - t)/t`` map onto (0, 1].

    Non-convergence is reported through ``converged=False`` rather than raised.
    """
    cfg = cfg or DEFAULT_QUAD
    if not upper > lower:
        if upper == lower:
            return QuadResult(0.0, 0.0, True)
        raise DomainError(f"need lower < upper, got [{lower}, {upper}]")

    cuts = sorted({float(p) for p in (points or ()) if lower < p < upper})
    edges = [float(lower), *cuts, float(upper)]
    # the quad limit is a subinterval budget per piece
    limit = max(int(cfg.max_refinements), 1)

    total = 0.0
    err = 0.0
    ok = True
    for a, b in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = _sp_integrate.quad(
                fn, a, b, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=limit, full_output=1
            )
        value, abserr = out[0], out[1]
        ier = out[2].get("ier", 0) if len(out) > 3 else 0
        if not (math.isfinite(value) and math.isfinite(abserr)):
            ok = False
        if ier not in (0,):
            ok = False
        total += value
        err += abserr

    converged = ok and err <= max(cfg.abs_tol, cfg.rel_tol * abs(total))
    return QuadResult(float(total), float(err), bool(converged))


# ---------------------------------------------------------------------------
# Riemann zeta via Euler-Maclaurin, differentiated term by term in alpha.
#
#   sum_{i>=N} i^-a = N^(1-a)/(a-1) + N^-a/2
#                     + sum_j B_2j/(2j)! * a(a+1)...(a+2j-2) * N^(-a-2j+1) + R
# ---------------------------------------------------------------------------

_EM_N = 20
_EM_TERMS = 10
_BERN = bernoulli(2 * _EM_TERMS)
# coefficient lists (highest degree first) of each correction polynomial and
# of its first two derivatives
_EM_COEFS = []
for _j in range(1, _EM_TERMS + 1):
    _p = Polynomial.fromroots(-np.arange(2 * _j - 1)) * (_BERN[2 * _j] / math.factorial(2 * _j))
    _EM_COEFS.append([[float(c) for c in (_p.deriv(r) if r else _p).coef[::-1]] for r in range(3)])
del _j, _p


def _horner(coefs, x):
    acc = 0.0
    for c in coefs:
        acc = acc * x + c
    return acc


_HEAD_LOGS = np.log(np.arange(1, _EM_N, dtype=float))


def _check_alpha_gt1(alpha):
    if not (alpha > 1):
        raise DomainError(f"zeta(alpha) diverges for alpha <= 1 (got {alpha})")


def zeta_and_derivatives(alpha: float, order: int = 2) -> tuple[float, ...]:
    """Return ``(zeta, zeta', ..., zeta^(order))`` at ``alpha``; ``order <= 2``."""
    _check_alpha_gt1(alpha)
    if order not in (0, 1, 2):
        raise DomainError("order must be 0, 1 or 2")
    a = float(alpha)
    log_n = math.log(_EM_N)
    n_pow = _EM_N ** (-a)

    head_terms = np.exp(-a * _HEAD_LOGS)
    out = []
    for k in range(order + 1):
        head = math.fsum((-_HEAD_LOGS) ** k * head_terms)

        def leibniz(derivs, shift):
            # d^k/da^k [g(a) * N^(-a-shift)]
            s = 0.0
            for r in range(k + 1):
                s += math.comb(k, r) * derivs[r] * (-log_n) ** (k - r)
            return s * n_pow * _EM_N ** (-shift)

        am1 = a - 1.0
        g_int = [(-1) ** r * math.factorial(r) / am1 ** (r + 1) for r in range(k + 1)]
        tail = leibniz(g_int, -1)
        tail += leibniz([0.5, 0.0, 0.0], 0)
        for j, coefs in enumerate(_EM_COEFS, start=1):
            derivs = [_horner(coefs[r], a) for r in range(k + 1)]
            tail += leibniz(derivs, 2 * j - 1)
        out.append(float(head + tail))
    return tuple(out)


def riemann_zeta(alpha: float) -> float:
    """Riemann zeta function for real ``alpha > 1``."""
    return zeta_and_derivatives(alpha, 0)[0]


def zeta_derivative(alpha: float, order: int = 1) -> float:
    """``order``-th derivative of zeta in alpha (order 1 or 2)."""
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    return zeta_and_derivatives(alpha, order)[order]


def gamma_fn(alpha: float) -> float:
    if not (alpha > 0):
        raise DomainError(f"gamma_fn is only defined here for alpha > 0 (got {alpha})")
    return math.gamma(alpha)


# ---------------------------------------------------------------------------
# Polylogarithm (real order > 0, real argument z <= 1)
# ---------------------------------------------------------------------------

_SERIES_RADIUS = 0.95


def _check_polylog_domain(alpha, z):
    if not (alpha > 0):
        raise DomainError(f"polylog order must be positive (got {alpha})")
    if z > 1:
        raise DomainError(f"polylog is not real-valued here for z > 1 (got {z})")
    if z == 1 and not alpha > 1:
        raise DomainError("Li_alpha(1) diverges for alpha <= 1")


def polylog_series(alpha: float, z: float) -> float:
    """Li_alpha(z) by direct summation of z^x / x^alpha; requires |z| < 1."""
    _check_polylog_domain(alpha, z)
    if not abs(z) < 1:
        raise DomainError("the power series needs |z| < 1")
    if z == 0:
        return 0.0
    # terms shrink at least like |z|^x
    n_terms = int(math.ceil(math.log(1e-18) / math.log(abs(z)))) + 2
    x = np.arange(1, n_terms + 1, dtype=float)
    terms = np.exp(x * math.log(abs(z)) - alpha * np.log(x))
    if z < 0:
        terms[::2] *= -1.0
    return math.fsum(terms)


def polylog_integral(alpha: float, z: float, cfg: QuadratureConfig | None = None) -> QuadResult:
    """Li_alpha(z) from the Bose-Einstein integral, valid for all real z < 1.

    The integrand is written as ``z t^(a-1) e^-t / (1 - z e^-t)``, which is
    finite for every t > 0 and z < 1. For large negative z the integrand is
    flat up to t ~ log|z|, so that point is used as a breakpoint.
    """
    _check_polylog_domain(alpha, z)
    if not z < 1:
        raise DomainError("the integral representation needs z < 1")
    cfg = cfg or QuadratureConfig(abs_tol=1e-300, rel_tol=1e-12, max_refinements=200)
    if z == 0:
        return QuadResult(0.0, 0.0, True)
    am1 = alpha - 1.0

    def integrand(t):
        et = math.exp(-t)
        return z * t**am1 * et / (1.0 - z * et)

    pts = [1.0]
    if z < -1:
        lz = math.log(-z)
        pts += [lz, lz + 10.0]
    if alpha > 2:
        pts.append(alpha - 1.0)
    res = integrate(integrand, 0.0, math.inf, cfg, points=pts)
    g = math.gamma(alpha)
    return QuadResult(res.value / g, res.error_estimate / g, res.converged)


def polylog(alpha: float, z: float, cfg: QuadratureConfig | None = None) -> float:
    """Real polylogarithm Li_alpha(z) for alpha > 0 and z <= 1.

    Uses the power series for |z| <= 0.95 and the integral representation
    otherwise (with quadrature settings ``cfg``); z = 1 returns zeta(alpha).
    """
    _check_polylog_domain(alpha, z)
    if z == 1:
        return riemann_zeta(alpha)
    if z == 0:
        return 0.0
    if abs(z) <= _SERIES_RADIUS:
        return polylog_series(alpha, z)
    res = polylog_integral(alpha, z, cfg)
    if not res.converged:
        raise NonConvergence(
            f"polylog integral did not converge at alpha={alpha}, z={z} (err={res.error_estimate:g})"
        )
    return res.value
