"""Moment-matching estimates of zero-truncated Poisson rates and the per-chapter
sequence of rates built from a frequency-of-frequencies table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .distributions import ztp_mean
from .errors import DomainError, InvariantViolation

__all__ = ["ztp_lambda_from_mean", "LambdaSequence", "lambda_sequence_from_table", "WEIGHTINGS"]

Weighting = Literal["per-word", "per-frequency"]
WEIGHTINGS = ("per-word", "per-frequency")


def ztp_lambda_from_mean(mean: float) -> float:
    """Solve lam / (1 - exp(-lam)) = mean for lam >= 0.

    The root always lies in [mean - 1, mean) because e^-lam is in (0, 1].
    Bisection on that bracket gets close, Newton polishes.
    """
    m = float(mean)
    if not m >= 1:
        raise DomainError(f"a zero-truncated Poisson mean is at least 1 (got {mean})")
    if m == 1:
        return 0.0
    if not math.isfinite(m):
        raise DomainError("mean must be finite")

    def g(lam):
        return ztp_mean(lam) - m

    lo, hi = max(0.0, m - 1.0), m
    # near m = 1 the lower end sits at the removable point lam = 0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-6 * max(1.0, hi):
            break
    lam = 0.5 * (lo + hi)
    for _ in range(20):
        if lam < 1e-3:
            # the closed form below cancels to 0 for tiny lam
            deriv = 0.5 + lam / 6.0 - lam**3 / 180.0
        else:
            em = math.exp(-lam)
            d = -math.expm1(-lam)
            # d/dlam [lam / (1 - e^-lam)] = (d - lam e^-lam) / d^2
            deriv = (d - lam * em) / (d * d)
        step = g(lam) / deriv
        new = min(max(lam - step, lo), hi)
        if abs(new - lam) <= 1e-16 * max(1.0, lam):
            lam = new
            break
        lam = new
    return lam


@dataclass(frozen=True)
class LambdaSequence:
    """Distinct rates in ascending order with integer multiplicities."""

    entries: tuple[tuple[float, int], ...]

    def __post_init__(self):
        lams = [lam for lam, _ in self.entries]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise InvariantViolation("lambdas sorted and distinct")
        if any(w < 1 for _, w in self.entries):
            raise InvariantViolation("weights positive")
        if any(lam < 0 for lam in lams):
            raise InvariantViolation("lambdas nonnegative")

    @property
    def total_weight(self) -> int:
        return sum(w for _, w in self.entries)

    @property
    def lambdas(self) -> list[float]:
        return [lam for lam, _ in self.entries]

    @property
    def weights(self) -> list[int]:
        return [w for _, w in self.entries]

    def __len__(self):
        return len(self.entries)


def lambda_sequence_from_table(table, weighting: Weighting = "per-word") -> LambdaSequence:
    """One rate per row of ``table``, matching the ZTP mean to the frequency value.

    ``per-word`` weights each rate by the number of words with that frequency;
    ``per-frequency`` counts every distinct frequency once.
    """
    if weighting not in WEIGHTINGS:
        raise DomainError(f"weighting must be one of {WEIGHTINGS}")
    rows = sorted(getattr(table, "rows", table))
    entries = []
    for value, count in rows:
        lam = ztp_lambda_from_mean(value)
        entries.append((lam, int(count) if weighting == "per-word" else 1))
    return LambdaSequence(tuple(entries))
