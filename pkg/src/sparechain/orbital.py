"""Orbital-mechanics primitives.

J2 nodal regression of circular orbits, the plane/parking alignment periods it
induces, their quantization onto the Markov time grid, and the coplanar
Hohmann transfer used to move a batch of spares up to its constellation plane.

Angles are radians, distances km, velocities km/s, times days.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import (
    DegenerateAlignmentError,
    InvalidGeometryError,
    InvalidPropulsionError,
    InvalidTransferError,
    TimeStepTooCoarseError,
)

SECONDS_PER_DAY = 86400.0
DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class EarthConstants:
    mu: float = 398600.4418  # km^3/s^2
    r_earth: float = 6378.137  # km
    j2: float = 1.08262668e-3

    def __post_init__(self):
        if not (self.mu > 0 and self.r_earth > 0 and self.j2 > 0):
            raise InvalidGeometryError("Earth constants must be strictly positive")


EARTH = EarthConstants()


@dataclass(frozen=True)
class ConstellationGeometry:
    """Walker-Delta constellation plus its parking orbits.

    Altitudes are above the Earth's surface; semi-major axes follow as
    ``r_earth + h``.
    """

    h_c: float
    h_p: float
    inclination: float
    n_orbit_c: int
    n_orbit_p: int
    n_sat_nominal: int

    def __post_init__(self):
        if not self.h_p > 0:
            raise InvalidGeometryError(f"parking altitude must be positive, got {self.h_p}")
        if not self.h_c > self.h_p:
            raise InvalidGeometryError(
                f"constellation altitude {self.h_c} must exceed parking altitude {self.h_p}")
        if not 0.0 <= self.inclination <= math.pi:
            raise InvalidGeometryError(f"inclination {self.inclination} rad outside [0, pi]")
        for name in ("n_orbit_c", "n_orbit_p", "n_sat_nominal"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidGeometryError(f"{name} must be a positive integer, got {value}")

    def a_c(self, constants: EarthConstants = EARTH) -> float:
        return constants.r_earth + self.h_c

    def a_p(self, constants: EarthConstants = EARTH) -> float:
        return constants.r_earth + self.h_p


@dataclass(frozen=True)
class TransferCosting:
    delta_v: float
    m_dry: float
    m_fuel: float

    @property
    def m_batch(self) -> float:
        return self.m_dry + self.m_fuel


def raan_drift_rate(a: float, inclination: float, constants: EarthConstants = EARTH) -> float:
    """Secular RAAN drift of a circular orbit, in rad/day."""
    if not a > constants.r_earth:
        raise InvalidGeometryError(f"semi-major axis {a} km is not above the Earth's surface")
    n = math.sqrt(constants.mu / a**3)
    rate = -1.5 * constants.j2 * (constants.r_earth / a) ** 2 * n * math.cos(inclination)
    return rate * SECONDS_PER_DAY


def relative_drift(geometry: ConstellationGeometry, constants: EarthConstants = EARTH) -> float:
    """Constellation minus parking drift rate, rad/day."""
    rate_c = raan_drift_rate(geometry.a_c(constants), geometry.inclination, constants)
    rate_p = raan_drift_rate(geometry.a_p(constants), geometry.inclination, constants)
    return rate_c - rate_p


def alignment_periods(geometry: ConstellationGeometry,
                      constants: EarthConstants = EARTH) -> tuple[float, float]:
    """Return ``(tau_c, tau_p)`` in days.

    ``tau_c`` is the time between a constellation plane's successive contacts
    with (any) parking orbit; ``tau_p`` is the time between a parking orbit's
    successive contacts with constellation planes.
    """
    delta = abs(relative_drift(geometry, constants))
    # cos(i) = 0 or equal altitudes: no relative motion, planes never meet.
    if delta < 1e-15:
        raise DegenerateAlignmentError(
            "zero relative RAAN drift between constellation and parking orbits")
    synodic = 2.0 * math.pi / delta
    return synodic / geometry.n_orbit_p, synodic / geometry.n_orbit_c


def _round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def quantize_periods(tau_c: float, tau_p: float, tau_mc: float) -> tuple[int, int]:
    """Express both alignment periods as whole numbers of Markov steps."""
    if not tau_mc > 0:
        raise TimeStepTooCoarseError(f"time step must be positive, got {tau_mc}")
    k_c = _round_half_away(tau_c / tau_mc)
    k_p = _round_half_away(tau_p / tau_mc)
    if k_c < 1 or k_p < 1:
        raise TimeStepTooCoarseError(
            f"time step {tau_mc} d is too coarse for alignment periods "
            f"({tau_c:.4g} d, {tau_p:.4g} d)")
    return k_c, k_p


def hohmann_delta_v(a_p: float, a_c: float, constants: EarthConstants = EARTH) -> float:
    """Total delta-v (km/s) of a raising Hohmann transfer from ``a_p`` to ``a_c``."""
    if not a_p > constants.r_earth:
        raise InvalidGeometryError(f"initial orbit radius {a_p} km is inside the Earth")
    if a_c < a_p:
        raise InvalidTransferError("only raising transfers (a_c >= a_p) are modeled")
    mu = constants.mu
    s = a_p + a_c
    burn1 = math.sqrt(mu / a_p) * (math.sqrt(2.0 * a_c / s) - 1.0)
    burn2 = math.sqrt(mu / a_c) * (1.0 - math.sqrt(2.0 * a_p / s))
    return burn1 + burn2


def fuel_mass(m_dry: float, delta_v: float, v_ex: float) -> float:
    """Rocket-equation propellant mass (kg) for a burn of ``delta_v``."""
    if not v_ex > 0:
        raise InvalidPropulsionError(f"exhaust velocity must be positive, got {v_ex}")
    if m_dry < 0 or delta_v < 0:
        raise InvalidPropulsionError("dry mass and delta-v must be non-negative")
    return m_dry * math.expm1(delta_v / v_ex)


def transfer_costing(geometry: ConstellationGeometry, m_dry: float, v_ex: float,
                     constants: EarthConstants = EARTH) -> TransferCosting:
    dv = hohmann_delta_v(geometry.a_p(constants), geometry.a_c(constants), constants)
    return TransferCosting(delta_v=dv, m_dry=m_dry, m_fuel=fuel_mass(m_dry, dv, v_ex))
