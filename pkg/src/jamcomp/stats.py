"""Paired one-sided t-test on accuracy samples.

The upper tail of the t distribution is computed from scratch via the
regularized incomplete beta function (continued fraction, modified Lentz)
so the package carries no statistics dependency; the test suite checks it
against an independent reference implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from jamcomp.errors import JamcompError

_MAX_ITERATIONS = 300
_EPS = 3e-14
_FPMIN = 1e-300


class DegenerateSamplesError(JamcompError):
    """Paired samples whose differences carry no variance."""


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITERATIONS + 1):
        m2 = 2 * m
        numerator = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numerator * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + numerator / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numerator * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + numerator / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x out of [0, 1]: {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fast only on one side of the mean;
    # use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_upper_tail(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive: {df}")
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    if t >= 0:
        return tail
    return 1.0 - tail


@dataclass(frozen=True)
class PairedTTestResult:
    t_statistic: float
    degrees_of_freedom: int
    p_value: float


def paired_t_test_one_sided(a: Sequence[float], b: Sequence[float]) -> PairedTTestResult:
    """Test H1: mean(a) > mean(b) on paired samples.

    t = mean(d) / (sd(d) / sqrt(n)) with the sample standard deviation
    (n - 1 denominator) of the differences d = a - b, n - 1 degrees of
    freedom, and a one-sided upper-tail p value.
    """
    if len(a) != len(b):
        raise ValueError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise ValueError(f"need at least two pairs, got {n}")
    differences = [float(x) - float(y) for x, y in zip(a, b)]
    mean = math.fsum(differences) / n
    variance = math.fsum((d - mean) ** 2 for d in differences) / (n - 1)
    if variance == 0.0:
        raise DegenerateSamplesError(
            "all paired differences are identical; the t statistic is undefined"
        )
    t = mean / math.sqrt(variance / n)
    p = student_t_upper_tail(t, n - 1)
    # The true tail is never exactly 0 or 1; keep rounding from reaching
    # the closed endpoints for extreme statistics.
    p = min(max(p, 5e-324), 1.0 - 2.0 ** -53)
    return PairedTTestResult(t_statistic=t, degrees_of_freedom=n - 1, p_value=p)
