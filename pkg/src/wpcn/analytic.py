"""Closed-form and quadrature throughput metrics.

The end-to-end SNR is ``gamma_A = c * X * Y`` where ``X`` and ``Y`` are
independent Gamma(N, 1) variables (normalized squared channel norms) and
``c = tau * gamma_bar * omega^2 / (1 - tau)``.  Its CDF is a finite sum of
Bessel K terms and its density involves ``K_0`` alone; both are evaluated
in the log domain by the kernel backend.

Two transmission modes are covered:

* delay-limited: fixed rate ``R``, throughput ``(1 - P_out) R (1 - tau)``;
* delay-tolerant: throughput ``(1 - tau) C`` with ``C`` the ergodic capacity.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from wpcn._backend import kernels as _k
from wpcn.errors import DegenerateTimeError, DomainError, LowSnrWarning, NumericFailure
from wpcn.model import SystemParams, derive
from wpcn.specfun import DEFAULT_ACCURACY, Accuracy, digamma, regularized_lower_gamma, \
    regularized_upper_gamma

__all__ = [
    "MODES",
    "ApproxConstants",
    "QuadratureSpec",
    "DEFAULT_APPROX",
    "DEFAULT_QUADRATURE",
    "cdf_gamma_a",
    "sf_gamma_a",
    "pdf_gamma_a",
    "cdf_gamma_a_approx",
    "outage_probability",
    "throughput_delay_limited",
    "throughput_delay_limited_approx",
    "throughput_delay_limited_asymptotic",
    "ergodic_capacity",
    "ergodic_capacity_at",
    "throughput_delay_tolerant",
    "throughput_delay_tolerant_asymptotic",
]

MODES = ("delay_limited", "delay_tolerant")
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ApproxConstants:
    """Shape constants of the incomplete-gamma CDF approximation."""

    m0: float = 1.6467
    omega0: float = 1.5709

    def __post_init__(self):
        if not (self.m0 > 0 and self.omega0 > 0):
            raise DomainError("approximation constants must be positive")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the ergodic-capacity integral."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            if not 0.0 < getattr(self, name) <= 1e-3:
                raise DomainError(f"{name} must lie in (0, 1e-3]")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be positive")


DEFAULT_APPROX = ApproxConstants()
DEFAULT_QUADRATURE = QuadratureSpec()


def _check_cdf_args(z, n, c):
    if int(n) != n or n < 1:
        raise DomainError("N must be a positive integer")
    if not c > 0:
        raise DomainError(f"SNR scale c must be positive, got {c!r}")
    if not z >= 0:
        raise DomainError(f"z must be non-negative, got {z!r}")
    return int(n)


def sf_gamma_a(z: float, n: int, c: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """``Pr(gamma_A > z)``; keeps full relative accuracy near one."""
    n = _check_cdf_args(z, n, c)
    if math.isinf(z):
        return 0.0
    return _k.product_sf(float(z), n, float(c), acc.eps, acc.max_terms)


def cdf_gamma_a(z: float, n: int, c: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Exact CDF of the end-to-end SNR, accurate in relative terms in both tails."""
    n = _check_cdf_args(z, n, c)
    if math.isinf(z):
        return 1.0
    return _k.product_cdf(float(z), n, float(c), acc.eps, acc.max_terms)


def pdf_gamma_a(z: float, n: int, c: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Density of the end-to-end SNR for ``z > 0``."""
    n = _check_cdf_args(z, n, c)
    if not z > 0:
        raise DomainError("pdf_gamma_a needs z > 0")
    if math.isinf(z):
        return 0.0
    return math.exp(_k.product_log_pdf(float(z), n, float(c), acc.eps, acc.max_terms))


def _approx_argument(z, c, k):
    return 2.0 * k.m0 / k.omega0 * math.sqrt(z / c)


def cdf_gamma_a_approx(z: float, n: int, c: float, k: ApproxConstants = DEFAULT_APPROX) -> float:
    """Incomplete-gamma approximation of :func:`cdf_gamma_a`."""
    n = _check_cdf_args(z, n, c)
    if math.isinf(z):
        return 1.0
    return regularized_lower_gamma(k.m0 + 2 * n - 2, _approx_argument(z, c, k))


def _interior_tau(params):
    if not 0.0 < params.tau < 1.0:
        raise DegenerateTimeError("tau must lie strictly inside (0, 1)")


def outage_probability(params: SystemParams) -> float:
    """Probability that the fixed rate exceeds the instantaneous capacity.

    Equal to one at ``tau == 0`` (nothing harvested); raises
    :class:`DegenerateTimeError` at ``tau == 1``.
    """
    d = derive(params)
    if params.tau == 0.0:
        return 1.0 if d.gamma_0 > 0 else 0.0
    c = d.snr_scale
    if c == 0.0:
        return 1.0 if d.gamma_0 > 0 else 0.0
    return cdf_gamma_a(d.gamma_0, params.n_antennas, c)


def throughput_delay_limited(params: SystemParams) -> float:
    """Exact delay-limited throughput ``(1 - P_out) R (1 - tau)``."""
    if params.tau in (0.0, 1.0) or params.rate == 0.0:
        return 0.0
    d = derive(params)
    c = d.snr_scale
    if c == 0.0:
        return 0.0
    success = sf_gamma_a(d.gamma_0, params.n_antennas, c)
    return success * params.rate * (1.0 - params.tau)


def throughput_delay_limited_approx(params: SystemParams,
                                    k: ApproxConstants = DEFAULT_APPROX) -> float:
    """Delay-limited throughput with the incomplete-gamma outage approximation."""
    if params.tau in (0.0, 1.0) or params.rate == 0.0:
        return 0.0
    d = derive(params)
    c = d.snr_scale
    if c == 0.0:
        return 0.0
    a = k.m0 + 2 * params.n_antennas - 2
    success = regularized_upper_gamma(a, _approx_argument(d.gamma_0, c, k))
    return params.rate * (1.0 - params.tau) * success


def throughput_delay_limited_asymptotic(params: SystemParams,
                                        k: ApproxConstants = DEFAULT_APPROX) -> float:
    """High-SNR expansion of :func:`throughput_delay_limited_approx`.

    Uses ``gamma(a, x) ~ x^a / a``.  At low SNR the result can be negative;
    it is returned unchanged and a :class:`LowSnrWarning` is issued.
    """
    _interior_tau(params)
    d = derive(params)
    c = d.snr_scale
    a = k.m0 + 2 * params.n_antennas - 2
    if c == 0.0:
        ratio = math.inf
    elif d.gamma_0 == 0.0:
        ratio = 0.0
    else:
        log_ratio = a * math.log(_approx_argument(d.gamma_0, c, k)) - math.lgamma(a + 1.0)
        ratio = math.exp(log_ratio) if log_ratio < 700.0 else math.inf
    value = params.rate * (1.0 - params.tau) * (1.0 - ratio)
    if value < 0:
        warnings.warn("delay-limited asymptote is negative at this SNR", LowSnrWarning,
                      stacklevel=2)
    return value


def ergodic_capacity_at(n: int, c: float, q: QuadratureSpec = DEFAULT_QUADRATURE,
                        acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Ergodic capacity ``E[log2(1 + c X Y)]`` in bits/s/Hz.

    The substitution ``z = c t^2`` turns the density into a ``c``-free weight
    ``4 t^(2N-1) K_0(2t) / ((N-1)!)^2``; the integral is truncated where a
    certified tail bound drops below ``q.abs_tol`` and integrated by adaptive
    Gauss-Kronrod.

    Raises
    ------
    NumericFailure
        If the tolerance is not met within ``q.max_subdivisions`` intervals.
        The partial estimate is attached as ``exc.partial``.
    """
    if int(n) != n or n < 1:
        raise DomainError("N must be a positive integer")
    if not c >= 0:
        raise DomainError("SNR scale must be non-negative")
    value, err, _, ok = _k.capacity_integral(int(n), float(c), q.abs_tol, q.rel_tol,
                                             q.max_subdivisions, acc.eps, acc.max_terms)
    if not ok:
        raise NumericFailure(
            f"capacity quadrature unconverged after {q.max_subdivisions} "
            f"subdivisions (error estimate {err:.3g})", partial=value)
    return value


def ergodic_capacity(params: SystemParams, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    if params.tau == 0.0:
        return 0.0
    return ergodic_capacity_at(params.n_antennas, derive(params).snr_scale, q)


def throughput_delay_tolerant(params: SystemParams,
                              q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Exact delay-tolerant throughput ``(1 - tau) C``."""
    if params.tau in (0.0, 1.0):
        return 0.0
    return (1.0 - params.tau) * ergodic_capacity(params, q)


def throughput_delay_tolerant_asymptotic(params: SystemParams) -> float:
    """High-SNR delay-tolerant throughput from ``log2(1 + z) ~ log2(z)``.

    Can be negative at low SNR; returned unchanged with a
    :class:`LowSnrWarning`.
    """
    _interior_tau(params)
    d = derive(params)
    tau = params.tau
    if d.gamma_bar == 0.0:
        return -math.inf
    bracket = (2.0 * digamma(params.n_antennas) + math.log(d.gamma_bar)
               + 2.0 * math.log(params.omega) - math.log((1.0 - tau) / tau))
    value = (1.0 - tau) / _LN2 * bracket
    if value < 0:
        warnings.warn("delay-tolerant asymptote is negative at this SNR", LowSnrWarning,
                      stacklevel=2)
    return value
