"""Rate and frequency unit conversions.

The canonical internal unit is rad/s. ``ueV`` (energy, via hbar), ``THz``
(ordinary frequency, via 2 pi) and ``gamma0`` (multiples of the free-space
decay rate, which needs context) are accepted at the edges.
"""

from __future__ import annotations

import math

from scipy import constants

from .errors import ValidationError

HBAR = constants.hbar
EPS0 = constants.epsilon_0
C_LIGHT = constants.c
E_CHARGE = constants.e
DEBYE = 1e-21 / constants.c  # C m

_ALIASES = {
    "rad/s": "rad/s",
    "ueV": "ueV",
    "μeV": "ueV",
    "µeV": "ueV",
    "THz": "THz",
    "Hz": "Hz",
    "gamma0": "gamma0",
}

_TO_RAD_S = {
    "rad/s": 1.0,
    "ueV": 1e-6 * E_CHARGE / HBAR,
    "THz": 2.0 * math.pi * 1e12,
    "Hz": 2.0 * math.pi,
}


def canonical_unit(unit: str) -> str:
    try:
        return _ALIASES[unit.strip()]
    except KeyError:
        raise ValidationError(f"unknown rate unit {unit!r}; expected one of {sorted(set(_ALIASES))}") from None


def to_rad_s(value: float, unit: str, gamma0: float | None = None) -> float:
    unit = canonical_unit(unit)
    if unit == "gamma0":
        if gamma0 is None:
            raise ValidationError("conversion from 'gamma0' needs the free-space rate as context")
        return value * gamma0
    return value * _TO_RAD_S[unit]


def from_rad_s(value: float, unit: str, gamma0: float | None = None) -> float:
    unit = canonical_unit(unit)
    if unit == "gamma0":
        if gamma0 is None:
            raise ValidationError("conversion to 'gamma0' needs the free-space rate as context")
        return value / gamma0
    return value / _TO_RAD_S[unit]


def convert(value: float, from_unit: str, to_unit: str, gamma0: float | None = None) -> float:
    """Convert a rate between any two supported units.

    >>> round(convert(1.0, "ueV", "rad/s") / 1e9, 4)
    1.5193
    """
    if canonical_unit(from_unit) == canonical_unit(to_unit):
        return value
    return from_rad_s(to_rad_s(value, from_unit, gamma0), to_unit, gamma0)


def vacuum_decay_rate(omega: float, dipole: float) -> float:
    """Free-space spontaneous emission rate ``omega^3 d^2 / (3 pi eps0 hbar c^3)`` in rad/s."""
    return omega**3 * dipole**2 / (3.0 * math.pi * EPS0 * HBAR * C_LIGHT**3)
