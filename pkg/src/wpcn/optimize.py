"""Throughput-optimal harvesting fraction.

Two high-SNR closed forms based on the principal Lambert W branch, and a
numerical search (coarse grid, then golden section) on the exact throughput
that serves as the reference at any SNR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from wpcn.analytic import DEFAULT_APPROX, ApproxConstants, QuadratureSpec, \
    throughput_delay_limited, throughput_delay_tolerant
from wpcn.errors import DomainError, HighSnrFormulaInvalid
from wpcn.model import SystemParams, derive
from wpcn.specfun import INV_E, digamma, lambert_w0

__all__ = [
    "TauSolution",
    "optimal_tau_limited_highsnr",
    "optimal_tau_tolerant_highsnr",
    "optimal_tau_search",
    "maximize_on_unit_interval",
    "golden_section_max",
]

METHODS = ("closed_form_limited", "closed_form_tolerant", "search")
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# tighter than the default so quadrature noise stays below golden-section resolution
SEARCH_QUADRATURE = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12, max_subdivisions=400)


@dataclass(frozen=True)
class TauSolution:
    """An optimal harvesting fraction and how it was obtained.

    Attributes
    ----------
    tau : float
        Harvesting fraction in ``(0, 1)``.
    objective_value : float
        Exact throughput of the matching mode at ``tau``, bits/s/Hz.
    method : str
        One of ``closed_form_limited``, ``closed_form_tolerant``, ``search``.
    residual : float
        How far ``tau`` is from satisfying the stationarity condition the
        method solves (log-domain for the closed forms, ``0`` for search).
    degenerate : bool
        True when the objective was flat and ``tau`` carries no information.
    """

    tau: float
    objective_value: float
    method: str
    residual: float = 0.0
    degenerate: bool = False

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"optimal tau must lie in (0, 1), got {self.tau!r}")
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")


def _limited_constants(params, k):
    d = derive(params)
    if d.gamma_0 <= 0:
        raise DomainError("the delay-limited closed form needs a positive rate")
    if d.gamma_bar <= 0:
        raise HighSnrFormulaInvalid("zero transmit power")
    a = k.m0 + 2 * params.n_antennas - 2
    b = 2.0 * k.m0 / k.omega0 * math.sqrt(d.gamma_0 / (d.gamma_bar * params.omega ** 2))
    return a, b


def optimal_tau_limited_highsnr(params: SystemParams,
                                k: ApproxConstants = DEFAULT_APPROX) -> TauSolution:
    """High-SNR optimum for the delay-limited mode.

    Solves ``y^(A+2) e^(-B y) = 2 Gamma(A) / B^A`` for
    ``y = sqrt((1 - tau) / tau)`` through the principal Lambert W branch,
    with ``A = m0 + 2N - 2`` and ``B = (2 m0 / omega0) sqrt(gamma_0 / (gamma_bar omega^2))``.
    The ``tau`` field of ``params`` is ignored.

    Raises
    ------
    HighSnrFormulaInvalid
        When the Lambert W argument falls below ``-1/e``, i.e. the SNR is too
        low for the formula; use :func:`optimal_tau_search` instead.
    """
    a, b = _limited_constants(params, k)
    # (2 Gamma(A) / B^A)^(1/(A+2)), kept in logs since B^A underflows at high SNR
    log_root = (math.log(2.0) + math.lgamma(a) - a * math.log(b)) / (a + 2.0)
    arg = -math.exp(math.log(b) - math.log(a + 2.0) + log_root)
    if arg < -INV_E - 1e-12:
        raise HighSnrFormulaInvalid(
            f"high-SNR formula invalid at this SNR (Lambert W argument {arg:.4g} < -1/e); "
            "use search")
    w = lambert_w0(arg)
    # y = -(A+2)/B * W(arg) = root * W(arg)/arg, finite even when arg underflows
    w_over_arg = w / arg if arg != 0.0 else 1.0
    y = math.exp(log_root) * w_over_arg
    tau = 1.0 / (1.0 + y * y)
    residual = abs((a + 2.0) * math.log(y) - b * y - math.log(2.0) - math.lgamma(a)
                   + a * math.log(b))
    value = throughput_delay_limited(params.replace(tau=tau))
    return TauSolution(tau, value, "closed_form_limited", residual)


def optimal_tau_tolerant_highsnr(params: SystemParams) -> TauSolution:
    """High-SNR optimum for the delay-tolerant mode.

    ``tau* = 1 / (1 + W(gamma_bar omega^2 e^(2 psi(N) - 1)))``.  The ``tau``
    field of ``params`` is ignored.
    """
    d = derive(params)
    g = d.gamma_bar * params.omega ** 2
    if not g > 0:
        raise DomainError("the delay-tolerant closed form needs positive transmit power")
    psi = digamma(params.n_antennas)
    w = lambert_w0(g * math.exp(2.0 * psi - 1.0))
    tau = 1.0 / (1.0 + w)
    residual = abs(2.0 * psi + math.log(g) - 1.0 / tau - math.log((1.0 - tau) / tau))
    value = throughput_delay_tolerant(params.replace(tau=tau))
    return TauSolution(tau, value, "closed_form_tolerant", residual)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       tol: float) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]`` until the bracket is ``<= tol`` wide.

    Only interior points are evaluated.  Returns ``(x, f(x))`` for the best
    point seen.
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def maximize_on_unit_interval(objective: Callable[[float], float], tol: float = 1e-4,
                              step: float = 0.01) -> tuple[float, float, bool]:
    """Global grid scan of ``(0, 1)`` followed by golden-section refinement.

    The grid best is bracketed by its neighbours (or the interval ends) and
    refined to a bracket of ``tol / 4`` so the result also beats its
    ``±tol`` neighbours.

    Returns
    -------
    tau, value, degenerate
        ``degenerate`` is True if the objective is constant on the grid, in
        which case ``tau`` is the grid midpoint 0.5.
    """
    if not 1e-8 < tol < 1e-2:
        raise DomainError("tol must lie in (1e-8, 1e-2)")
    n = int(round(1.0 / step))
    grid = [i / n for i in range(1, n)]
    values = [objective(t) for t in grid]
    best = max(range(len(grid)), key=values.__getitem__)
    if max(values) == min(values):
        return 0.5, objective(0.5), True
    lo = grid[best - 1] if best > 0 else 0.0
    hi = grid[best + 1] if best < len(grid) - 1 else 1.0
    x, fx = golden_section_max(objective, lo, hi, tol / 4.0)
    if fx < values[best]:
        x, fx = grid[best], values[best]
    return x, fx, False


def optimal_tau_search(mode: str, params: SystemParams, tol: float = 1e-4) -> TauSolution:
    """Numerically optimal ``tau`` for the exact throughput of ``mode``."""
    if mode == "delay_limited":
        def objective(t):
            return throughput_delay_limited(params.replace(tau=t))
    elif mode == "delay_tolerant":
        def objective(t):
            return throughput_delay_tolerant(params.replace(tau=t), SEARCH_QUADRATURE)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    tau, value, degenerate = maximize_on_unit_interval(objective, tol)
    return TauSolution(tau, value, "search", 0.0, degenerate)
