"""Real-valued special functions used by the throughput expressions.

All heavy lifting happens in the kernel backend (compiled when available,
see :mod:`wpcn._backend`); this module validates arguments and turns kernel
non-convergence into exceptions.

Bessel products that overflow for many antennas are available in the log
domain through :func:`log_bessel_k`.
"""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass

from wpcn._backend import kernels as _k
from wpcn.errors import DomainError, NumericFailure

__all__ = [
    "Accuracy",
    "DEFAULT_ACCURACY",
    "ln_gamma",
    "lower_incomplete_gamma",
    "regularized_lower_gamma",
    "regularized_upper_gamma",
    "digamma",
    "bessel_k",
    "bessel_ke",
    "log_bessel_k",
    "lambert_w0",
]

INV_E = math.exp(-1.0)
_BRANCH_SLACK = 1e-12


@dataclass(frozen=True)
class Accuracy:
    """Convergence settings for series and continued fractions.

    Parameters
    ----------
    rel_tol : float
        Target relative accuracy, in ``(0, 1e-3]``.
    max_terms : int
        Cap on series terms or continued-fraction steps, at least 16.
    """

    rel_tol: float = 1e-10
    max_terms: int = 2000

    def __post_init__(self):
        if not 0.0 < self.rel_tol <= 1e-3:
            raise DomainError("rel_tol must lie in (0, 1e-3]")
        if self.max_terms < 16:
            raise DomainError("max_terms must be at least 16")

    @property
    def eps(self) -> float:
        # per-term stopping threshold, tighter than the target
        return max(1e-16, self.rel_tol * 1e-3)


DEFAULT_ACCURACY = Accuracy()


def _checked(value, what):
    if math.isnan(value):
        raise NumericFailure(f"{what} did not converge")
    return value


def ln_gamma(a: float) -> float:
    """Natural log of the complete gamma function for ``a > 0``."""
    if not a > 0:
        raise DomainError(f"ln_gamma needs a > 0, got {a!r}")
    return _k.ln_gamma(float(a))


def regularized_lower_gamma(a: float, x: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """``P(a, x) = gamma(a, x) / Gamma(a)``."""
    _check_gamma_args(a, x)
    if math.isinf(x):
        return 1.0
    p = _k.gammainc_lower_reg(float(a), float(x), acc.eps, acc.max_terms)
    return _checked(p, "incomplete gamma")


def regularized_upper_gamma(a: float, x: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """``Q(a, x) = 1 - P(a, x)``, accurate when ``P`` is close to one."""
    _check_gamma_args(a, x)
    if math.isinf(x):
        return 0.0
    q = _k.gammainc_upper_reg(float(a), float(x), acc.eps, acc.max_terms)
    return _checked(q, "incomplete gamma")


def lower_incomplete_gamma(a: float, x: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Lower incomplete gamma ``int_0^x t^(a-1) e^(-t) dt`` (not regularized)."""
    p = regularized_lower_gamma(a, x, acc)
    if p == 0.0:
        return 0.0
    return math.exp(math.log(p) + _k.ln_gamma(float(a)))


def _check_gamma_args(a, x):
    if not a > 0:
        raise DomainError(f"incomplete gamma needs a > 0, got {a!r}")
    if not x >= 0:
        raise DomainError(f"incomplete gamma needs x >= 0, got {x!r}")


def digamma(x: float) -> float:
    """Logarithmic derivative of the gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"digamma needs x > 0, got {x!r}")
    return _k.digamma(float(x))


def _check_bessel_args(n, x):
    n = operator.index(n)
    if n < 0:
        raise DomainError(f"Bessel order must be non-negative, got {n}")
    if not x > 0:
        raise DomainError(f"Bessel K needs x > 0, got {x!r}")
    return n, float(x)


def log_bessel_k(n: int, x: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """``log K_n(x)`` for integer ``n >= 0``, finite wherever ``K_n`` is."""
    n, x = _check_bessel_args(n, x)
    if math.isinf(x):
        return -math.inf
    return _checked(_k.log_bessel_k(n, x, acc.eps, acc.max_terms), "Bessel K")


def bessel_ke(n: int, x: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Exponentially scaled Bessel function ``e^x K_n(x)``."""
    n, x = _check_bessel_args(n, x)
    return math.exp(log_bessel_k(n, x, acc) + x)


def bessel_k(n: int, x: float, acc: Accuracy = DEFAULT_ACCURACY, full_output: bool = False):
    """Modified Bessel function of the second kind ``K_n(x)``.

    Parameters
    ----------
    n : int
        Non-negative integer order.
    x : float
        Positive argument.
    acc : Accuracy, optional
    full_output : bool, optional
        If True, return ``(value, underflowed)``.  Values too small for a
        double come back as ``0.0`` with ``underflowed`` set; this is not an
        error.  Use :func:`bessel_ke` or :func:`log_bessel_k` instead.

    Raises
    ------
    DomainError
        If ``x <= 0`` or ``n < 0``.
    OverflowError
        If ``K_n(x)`` exceeds the double range (large ``n``, tiny ``x``).
    """
    lk = log_bessel_k(n, x, acc)
    value = math.exp(lk)
    underflowed = value == 0.0
    if full_output:
        return value, underflowed
    return value


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function, ``W e^W = x``.

    Arguments down to ``-1/e - 1e-12`` are accepted and clamped to the
    branch point so rounding in callers does not trip the domain check.
    """
    if math.isnan(x) or x < -INV_E - _BRANCH_SLACK:
        raise DomainError(f"no real principal-branch value of Lambert W at x={x!r}")
    if math.isinf(x):
        return math.inf
    return _k.lambert_w0(max(float(x), -INV_E))
