"""Scenario parameters and the per-block physical quantities.

One transmission block has unit length.  The access point spends a fraction
``tau`` of it beamforming energy to the user, which then spends the rest
transmitting back with whatever it harvested.  Powers are given in dBm and
converted to watts once; everything downstream is linear.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from wpcn.errors import DegenerateTimeError, DomainError

__all__ = [
    "REFERENCE_GAIN",
    "LinkBudget",
    "SystemParams",
    "DerivedQuantities",
    "ChannelDraw",
    "dbm_to_watts",
    "omega_from_link",
    "derive",
    "harvested_energy",
    "uplink_snr",
]

#: Power gain at the 1 m reference distance (30 dB attenuation).
REFERENCE_GAIN = 1e-3


def dbm_to_watts(dbm):
    if np.ndim(dbm) == 0:
        return 10.0 ** ((float(dbm) - 30.0) / 10.0)
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class LinkBudget:
    """Distance-based path loss between access point and user."""

    distance_m: float = 10.0
    path_loss_exponent: float = 2.0
    reference_gain: float = REFERENCE_GAIN

    def __post_init__(self):
        if not self.distance_m > 0:
            raise DomainError("distance_m must be positive")
        if not 2.0 <= self.path_loss_exponent <= 5.0:
            raise DomainError("path_loss_exponent must lie in [2, 5]")
        if self.reference_gain != REFERENCE_GAIN:
            raise DomainError("reference_gain is fixed at 1e-3")


def omega_from_link(lb: LinkBudget) -> float:
    """Mean per-entry channel power gain ``1e-3 * d^-alpha``."""
    return lb.reference_gain * lb.distance_m ** (-lb.path_loss_exponent)


@dataclass(frozen=True)
class SystemParams:
    """Full description of one operating point.

    Attributes
    ----------
    n_antennas : int
        Antennas at the access point.
    tx_power_dbm : float
        Downlink transmit power.
    efficiency : float
        RF-to-DC conversion efficiency, in ``(0, 1]``.
    noise_power_dbm : float
        Receiver noise power.
    rate : float
        Fixed uplink rate in bits/s/Hz for the delay-limited mode.
    tau : float
        Fraction of the block spent harvesting, in ``[0, 1]``.
    omega : float
        Mean channel power gain per antenna (see :func:`omega_from_link`).
    """

    n_antennas: int = 2
    tx_power_dbm: float = 30.0
    efficiency: float = 0.5
    noise_power_dbm: float = -80.0
    rate: float = 2.0
    tau: float = 0.5
    omega: float = 1e-5

    def __post_init__(self):
        if isinstance(self.n_antennas, bool) or int(self.n_antennas) != self.n_antennas \
                or self.n_antennas < 1:
            raise DomainError("n_antennas must be a positive integer")
        object.__setattr__(self, "n_antennas", int(self.n_antennas))
        if not 0.0 < self.efficiency <= 1.0:
            raise DomainError("efficiency must lie in (0, 1]")
        if not 0.0 <= self.tau <= 1.0:
            raise DomainError("tau ∈ [0,1] violated")
        if not self.omega > 0:
            raise DomainError("omega must be positive")
        if not self.rate >= 0:
            raise DomainError("rate must be non-negative")
        if math.isnan(self.tx_power_dbm) or math.isnan(self.noise_power_dbm):
            raise DomainError("powers must not be NaN")

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    @property
    def tx_power_w(self) -> float:
        return dbm_to_watts(self.tx_power_dbm)

    @property
    def noise_power_w(self) -> float:
        return dbm_to_watts(self.noise_power_dbm)


@dataclass(frozen=True)
class DerivedQuantities:
    """SNR scale factors derived from :class:`SystemParams`.

    ``snr_scale`` is the factor ``c`` with ``gamma_A = c * |h|^2 |g|^2 / omega^2``;
    it does not exist when ``tau == 1``.
    """

    gamma_bar: float
    gamma_0: float
    tau: float
    omega: float

    @property
    def snr_scale(self) -> float:
        if self.tau >= 1.0:
            raise DegenerateTimeError("no transmission time: tau == 1")
        return self.tau * self.gamma_bar * self.omega ** 2 / (1.0 - self.tau)


def derive(params: SystemParams) -> DerivedQuantities:
    gamma_bar = params.efficiency * params.tx_power_w / params.noise_power_w
    gamma_0 = 2.0 ** params.rate - 1.0
    return DerivedQuantities(gamma_bar, gamma_0, params.tau, params.omega)


@dataclass(frozen=True)
class ChannelDraw:
    """Squared norms of the downlink and uplink channel vectors.

    Fields may be scalars or equally shaped arrays of independent draws.
    """

    h_norm_sq: float | np.ndarray
    g_norm_sq: float | np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.h_norm_sq) < 0) or np.any(np.asarray(self.g_norm_sq) < 0):
            raise DomainError("squared channel norms must be non-negative")


def harvested_energy(draw: ChannelDraw, params: SystemParams):
    """Energy collected during the harvesting phase, in joules per unit block."""
    return params.efficiency * params.tau * params.tx_power_w * draw.h_norm_sq


def uplink_snr(draw: ChannelDraw, params: SystemParams):
    """SNR at the access point after maximum-ratio combining."""
    if not 0.0 < params.tau < 1.0:
        raise DegenerateTimeError("uplink SNR needs tau strictly inside (0, 1)")
    gamma_bar = derive(params).gamma_bar
    return params.tau / (1.0 - params.tau) * gamma_bar * draw.h_norm_sq * draw.g_norm_sq
