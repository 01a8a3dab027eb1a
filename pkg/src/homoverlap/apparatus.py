"""Per-pair detection model of a fiber Hong-Ou-Mandel interferometer.

The two-photon coincidence probability behind a beam splitter of intensity
transmittance ``T`` (``R = 1 - T``) is::

    eta1 * eta2 * [(T^2 + R^2) - 2 T R * v_m * g(delay) * F]

with ``F = Tr(rho1' rho2)`` the polarization overlap at the coupler,
``v_m`` the lumped non-polarization mode overlap and ``g`` a Gaussian
envelope in stage displacement.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import qcore
from ._validation import (check_finite, check_non_negative, check_positive,
                          check_unit_interval)
from .exceptions import DomainError


@dataclass(frozen=True)
class ApparatusParams:
    """Interferometer imperfections and rates.

    Defaults describe the original setup: 51% detector efficiency, a
    39.4 degree residual fiber phase on arm 1, and a pair rate giving about
    3300 shoulder coincidences per second.
    """

    transmittance: float = 0.5
    mode_overlap: float = 0.992
    arm_phase_deg: float = 39.4
    eta1: float = 0.51
    eta2: float = 0.51
    pair_rate_hz: float = 25400.0
    dark_coinc_hz: float = 0.0
    dip_width_um: float = 60.0
    shoulder_delay_um: float = 200.0
    phase_arm: int = 1

    def __post_init__(self):
        check_unit_interval(self.transmittance, "transmittance", closed=False)
        check_unit_interval(self.mode_overlap, "mode_overlap")
        check_finite(self.arm_phase_deg, "arm_phase_deg")
        check_unit_interval(self.eta1, "eta1")
        check_unit_interval(self.eta2, "eta2")
        check_non_negative(self.pair_rate_hz, "pair_rate_hz")
        check_non_negative(self.dark_coinc_hz, "dark_coinc_hz")
        check_positive(self.dip_width_um, "dip_width_um")
        check_finite(self.shoulder_delay_um, "shoulder_delay_um")
        if self.phase_arm not in (1, 2):
            raise DomainError(f"phase_arm must be 1 or 2, got {self.phase_arm!r}")

    @classmethod
    def ideal(cls, **overrides) -> ApparatusParams:
        """Balanced splitter, perfect mode overlap, no fiber phase, no background."""
        base = dict(transmittance=0.5, mode_overlap=1.0, arm_phase_deg=0.0,
                    dark_coinc_hz=0.0)
        base.update(overrides)
        return cls(**base)

    @property
    def reflectance(self):
        return 1.0 - self.transmittance

    @property
    def arm_phase_rad(self):
        return math.radians(self.arm_phase_deg)

    def replace(self, **changes) -> ApparatusParams:
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)


def envelope(params: ApparatusParams, delay_um) -> float:
    """Gaussian interference envelope ``exp(-(delay/L_c)^2)``."""
    delay_um = check_finite(delay_um, "delay_um")
    return math.exp(-((delay_um / params.dip_width_um) ** 2))


def effective_visibility(params: ApparatusParams) -> float:
    """Factor by which the measured overlap is compressed: ``v_m 2TR / (T^2 + R^2)``."""
    t, r = params.transmittance, params.reflectance
    return params.mode_overlap * 2 * t * r / (t * t + r * r)


def states_at_coupler(params, rho1, rho2):
    """Apply the effective fiber phase to whichever arm carries it."""
    rho1, rho2 = qcore.as_density(rho1), qcore.as_density(rho2)
    if params.arm_phase_deg == 0:
        return rho1, rho2
    if params.phase_arm == 1:
        return qcore.apply_arm_phase(rho1, params.arm_phase_rad), rho2
    return rho1, qcore.apply_arm_phase(rho2, params.arm_phase_rad)


def coupler_overlap(params, rho1, rho2) -> float:
    return qcore.overlap(*states_at_coupler(params, rho1, rho2))


def _coincidence_from_overlap(params, f, delay_um):
    t, r = params.transmittance, params.reflectance
    bracket = (t * t + r * r) - 2 * t * r * params.mode_overlap * envelope(params, delay_um) * f
    return params.eta1 * params.eta2 * bracket


def coincidence_prob(params: ApparatusParams, rho1, rho2, delay_um=0.0) -> float:
    """Probability that one generated pair yields a coincidence click.

    Background coincidences are a rate, not a per-pair quantity, and are
    added by :func:`coincidence_rate_hz`.
    """
    return _coincidence_from_overlap(params, coupler_overlap(params, rho1, rho2), delay_um)


def coincidence_rate_hz(params: ApparatusParams, rho1, rho2, delay_um=0.0) -> float:
    """Mean coincidence rate including the accidental background."""
    return params.pair_rate_hz * coincidence_prob(params, rho1, rho2, delay_um) + params.dark_coinc_hz


def shoulder_prob(params: ApparatusParams) -> float:
    """Per-pair coincidence probability with no interference, ``eta1 eta2 (T^2 + R^2)``.

    At the default 200 um shoulder the neglected envelope term is below 1e-4.
    """
    t, r = params.transmittance, params.reflectance
    return params.eta1 * params.eta2 * (t * t + r * r)


def dip_curve(params: ApparatusParams, rho1, rho2, delays) -> np.ndarray:
    """Per-pair coincidence probability at each stage displacement in ``delays``."""
    f = coupler_overlap(params, rho1, rho2)
    return np.array([_coincidence_from_overlap(params, f, d) for d in delays])


def expected_overlap_estimate(params: ApparatusParams, rho1, rho2) -> float:
    """Infinite-statistics value of ``1 - C0/C_shoulder`` for this apparatus."""
    f = coupler_overlap(params, rho1, rho2)
    dip = params.pair_rate_hz * _coincidence_from_overlap(params, f, 0.0) + params.dark_coinc_hz
    shoulder = (params.pair_rate_hz * _coincidence_from_overlap(params, f, params.shoulder_delay_um)
                + params.dark_coinc_hz)
    return 1.0 - dip / shoulder
