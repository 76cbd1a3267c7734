"""Dissipative and coherent qubit-qubit rates from projected Green values."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import PositivityError, ValidationError
from .greens import GreenProvider, ProjectedGreen, Site, free_space_projected
from .units import vacuum_decay_rate

POSITIVITY_RTOL = 1e-12
RECIPROCITY_RTOL = 1e-9


@dataclass(frozen=True)
class QubitPair:
    """Two identical two-level emitters.

    Positions are 3-vectors in metres; guide providers read the ``z``
    component. ``dipole`` is the transition dipole vector in C m.
    """

    omega_a: float
    omega_b: float
    dipole: tuple[float, float, float]
    r_a: tuple[float, float, float]
    r_b: tuple[float, float, float]
    gamma_a: float = 0.0
    gamma_b: float = 0.0
    labels: tuple[str, str] = ("a", "b")

    def __post_init__(self):
        if not (self.omega_a > 0 and self.omega_b > 0):
            raise ValidationError("transition frequencies must be positive")
        if not np.linalg.norm(self.dipole) > 0:
            raise ValidationError("dipole moment must be non-zero")
        if self.gamma_a < 0 or self.gamma_b < 0:
            raise ValidationError("dephasing rates must be non-negative")

    @classmethod
    def on_axis(cls, omega: float, dipole, z_a: float, z_b: float, dephasing: float = 0.0,
                labels: tuple[str, str] = ("a", "b")) -> "QubitPair":
        d = np.asarray(dipole, dtype=float)
        d = tuple(float(x) for x in (d if d.shape == (3,) else d * np.array([1.0, 0.0, 0.0])))
        return cls(omega, omega, d, (0.0, 0.0, float(z_a)), (0.0, 0.0, float(z_b)),
                   dephasing, dephasing, labels)

    @property
    def dipole_magnitude(self) -> float:
        return float(np.linalg.norm(self.dipole))

    @property
    def sites(self) -> tuple[Site, Site]:
        return Site(self.labels[0], tuple(self.r_a)), Site(self.labels[1], tuple(self.r_b))

    @property
    def gamma0(self) -> float:
        return vacuum_decay_rate(self.omega_a, self.dipole_magnitude)

    def scaled_dipole(self, factor: float) -> "QubitPair":
        return replace(self, dipole=tuple(factor * x for x in self.dipole))


@dataclass(frozen=True)
class RateMatrix:
    """Rates in rad/s; the constructor enforces the Lindblad positivity condition."""

    gamma_aa: float
    gamma_bb: float
    gamma_ab: float
    gamma_ba: float
    g_ab: float
    g_ba: float

    def __post_init__(self):
        vals = dict(gamma_aa=self.gamma_aa, gamma_bb=self.gamma_bb, gamma_ab=self.gamma_ab,
                    gamma_ba=self.gamma_ba, g_ab=self.g_ab, g_ba=self.g_ba)
        if not all(math.isfinite(v) for v in vals.values()):
            raise PositivityError("rates must be finite", **vals)
        if self.gamma_aa < 0 or self.gamma_bb < 0:
            raise PositivityError("self decay rates must be non-negative", **vals)
        scale = max(abs(self.gamma_aa), abs(self.gamma_bb), abs(self.gamma_ab), 1e-300)
        if abs(self.gamma_ab - self.gamma_ba) > RECIPROCITY_RTOL * scale:
            raise PositivityError("cross decay rates differ; decay matrix is not Hermitian", **vals)
        bound = math.sqrt(self.gamma_aa * self.gamma_bb) + POSITIVITY_RTOL * self.gamma_aa
        if abs(self.gamma_ab) > bound:
            raise PositivityError("|gamma_ab| exceeds sqrt(gamma_aa gamma_bb)", **vals)

    @classmethod
    def symmetric(cls, gamma_aa: float, gamma_ab: float, g_ab: float) -> "RateMatrix":
        return cls(gamma_aa, gamma_aa, gamma_ab, gamma_ab, g_ab, g_ab)

    @property
    def decay_matrix(self) -> np.ndarray:
        return np.array([[self.gamma_aa, self.gamma_ab], [self.gamma_ba, self.gamma_bb]])

    @property
    def is_symmetric(self) -> bool:
        tol = 1e-9 * max(self.gamma_aa, self.gamma_bb, 1e-300)
        return abs(self.gamma_aa - self.gamma_bb) <= tol and abs(self.g_ab - self.g_ba) <= tol

    def scaled(self, factor: float) -> "RateMatrix":
        return RateMatrix(*(factor * v for v in self.as_tuple()))

    def as_tuple(self) -> tuple[float, ...]:
        return (self.gamma_aa, self.gamma_bb, self.gamma_ab, self.gamma_ba, self.g_ab, self.g_ba)


def projected_values(pair: QubitPair, provider: GreenProvider, include_free_space: bool = True
                     ) -> dict[tuple[int, int], ProjectedGreen]:
    """Total projected Green values for the four site pairs, keyed by index."""
    if pair.omega_a != pair.omega_b:
        raise ValidationError("emitters must share a transition frequency")
    sites = pair.sites
    omega = pair.omega_a
    out = {}
    for i in range(2):
        for j in range(2):
            val = provider.projected(sites[i], sites[j], omega, pair.dipole)
            if include_free_space and provider.scattered_only:
                coincident = sites[i].position == sites[j].position
                val = val + free_space_projected(pair.dipole, sites[i].position, sites[j].position, omega,
                                                 coincident=coincident,
                                                 labels=(sites[i].label, sites[j].label))
            out[i, j] = val
    return out


def compute_rates(pair: QubitPair, provider: GreenProvider, include_free_space: bool = True) -> RateMatrix:
    """``Gamma_ij = Im J_ij`` and ``g_ij = Re J_ij / 2``; self couplings are dropped.

    The free-space part is added only for providers that describe the
    scattered field. If the two emitters coincide, the cross coupling inherits
    the singular vacuum shift and is rejected.
    """
    j = projected_values(pair, provider, include_free_space)
    return RateMatrix(
        gamma_aa=j[0, 0].gamma, gamma_bb=j[1, 1].gamma,
        gamma_ab=j[0, 1].gamma, gamma_ba=j[1, 0].gamma,
        g_ab=j[0, 1].coupling, g_ba=j[1, 0].coupling,
    )


def normalized_rates(rates: RateMatrix, pair: QubitPair) -> RateMatrix:
    """Every entry divided by the free-space rate of the pair's emitters."""
    return rates.scaled(1.0 / pair.gamma0)

