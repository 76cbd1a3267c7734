"""Dyadic Green functions of the photonic reservoir, projected onto the emitter dipole.

All providers return the projected value ``J = (2 / eps0 hbar) d.G.d`` in
rad/s, so that the dissipative rate is ``Im J`` and the coherent coupling is
``Re J / 2``.

The free-space dyadic uses the normalisation
``G0 = (k0^2 + grad grad) exp(i k0 R) / (4 pi R)``, for which
``Im G0_jj(r, r) = k0^3 / (6 pi)`` and the coincident decay rate reduces to
``omega^3 d^2 / (3 pi eps0 hbar c^3)``.

Waveguides are described by effective single-mode 1D models in which the
scattered part is ``J_sc = i Gamma_pl u(z_a, z_b)``, with ``u`` the unit 1D
Green function of a mode of complex wavenumber ``2 pi / lambda_spp + i / (2 l)``
(``l`` is the intensity propagation length). Finite guides add partially
reflecting ends; slots are lumped two-port scatterers.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import ConfigurationError, DomainError, SingularityError, ValidationError
from .units import C_LIGHT, EPS0, HBAR

IMAGE_SUM_REL_TOL = 1e-12
IMAGE_SUM_MAX_TERMS = 10_000_000

DEFAULT_R_END = complex(-0.6, 0.0)  # |r| = 0.6, phase pi
DEFAULT_SLOT_R = 0.3j
DEFAULT_SLOT_T = complex(0.9, 0.0)


@dataclass(frozen=True)
class Site:
    """Labelled emitter location; guides read the ``z`` coordinate as the axis position."""

    label: str
    position: tuple[float, float, float]

    @classmethod
    def on_axis(cls, label: str, z: float) -> "Site":
        return cls(label, (0.0, 0.0, float(z)))

    @property
    def z(self) -> float:
        return self.position[2]


@dataclass(frozen=True)
class GreenTensor:
    components: np.ndarray
    omega: float


@dataclass(frozen=True)
class ProjectedGreen:
    """``J = (2 / eps0 hbar) d.G.d`` between two sites, in rad/s.

    ``real_absent`` marks coincident free-space evaluations, where the real
    part (the vacuum Lamb shift) is singular and is not reported.
    """

    value: complex
    site_a: str
    site_b: str
    omega: float
    real_absent: bool = False

    @property
    def gamma(self) -> float:
        return self.value.imag

    @property
    def coupling(self) -> float:
        if self.real_absent:
            raise SingularityError("real part of a coincident free-space Green value is not defined")
        return self.value.real / 2.0

    def __add__(self, other: "ProjectedGreen") -> "ProjectedGreen":
        return ProjectedGreen(
            self.value + other.value, self.site_a, self.site_b, self.omega,
            self.real_absent or other.real_absent,
        )


# --------------------------------------------------------------------------- free space


def _as_vec(r) -> np.ndarray:
    v = np.asarray(r, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ValidationError(f"expected a 3-vector, got shape {v.shape}")
    return v


def free_space_dyadic(r_a, r_b, omega: float) -> GreenTensor:
    """Closed-form homogeneous-space dyadic between two distinct points."""
    if omega <= 0:
        raise ValidationError("omega must be positive")
    sep = _as_vec(r_a) - _as_vec(r_b)
    dist = float(np.linalg.norm(sep))
    if dist == 0.0:
        raise SingularityError("free-space dyadic is singular at coincident points")
    k = omega / C_LIGHT
    rhat = sep / dist
    kr = k * dist
    phase = np.exp(1j * kr) / (4.0 * math.pi * dist)
    transverse = k * k * (1.0 + 1j / kr - 1.0 / kr**2)
    longitudinal = k * k * (-1.0 - 3j / kr + 3.0 / kr**2)
    comps = phase * (transverse * np.eye(3) + longitudinal * np.outer(rhat, rhat))
    return GreenTensor(comps, omega)


def free_space_projected(d, r_a, r_b, omega: float, coincident: bool = False,
                         labels: tuple[str, str] = ("a", "b")) -> ProjectedGreen:
    """Projected free-space Green value.

    At coincident points only the imaginary part is finite; pass
    ``coincident=True`` to get it (the result has ``real_absent`` set).
    """
    if omega <= 0:
        raise ValidationError("omega must be positive")
    d = _as_vec(d)
    same = np.array_equal(_as_vec(r_a), _as_vec(r_b))
    pref = 2.0 / (EPS0 * HBAR)
    if same:
        if not coincident:
            raise SingularityError("coincident points need coincident=True (imaginary part only)")
        k = omega / C_LIGHT
        im = pref * float(d @ d) * k**3 / (6.0 * math.pi)
        return ProjectedGreen(complex(0.0, im), labels[0], labels[1], omega, real_absent=True)
    g = free_space_dyadic(r_a, r_b, omega).components
    return ProjectedGreen(complex(pref * (d @ g @ d)), labels[0], labels[1], omega)


# --------------------------------------------------------------------------- 1D guide models


@dataclass(frozen=True)
class Plasmon1DModel:
    lambda_spp: float
    prop_length: float
    gamma_pl: float
    axis_origin: float = 0.0

    def __post_init__(self):
        if not self.lambda_spp > 0:
            raise ValidationError(f"lambda_spp must be positive, got {self.lambda_spp}")
        if not self.prop_length > 0:
            raise ValidationError(f"prop_length must be positive, got {self.prop_length}")
        if not self.gamma_pl >= 0:
            raise ValidationError(f"gamma_pl must be non-negative, got {self.gamma_pl}")

    @property
    def k_spp(self) -> float:
        return 2.0 * math.pi / self.lambda_spp

    @property
    def k_complex(self) -> complex:
        return complex(self.k_spp, 0.5 / self.prop_length)


@dataclass(frozen=True)
class FabryPerotModel:
    """Guide of finite length between partially reflecting ends at ``0`` and ``length``."""

    base: Plasmon1DModel
    length: float
    r_end: complex = DEFAULT_R_END

    def __post_init__(self):
        if not self.length > 0:
            raise ValidationError(f"guide length must be positive, got {self.length}")
        if abs(self.r_end) > 1.0:
            raise ValidationError(f"|r_end| must not exceed 1, got {abs(self.r_end):.6g}")
        if abs(self.r_end) == 1.0 and math.isinf(self.base.prop_length):
            raise ValidationError("lossless guide with |r_end| = 1 has a divergent image series")


@dataclass(frozen=True)
class SlotScatterer:
    """Lumped symmetric two-port at ``position`` along the guide.

    Passivity needs ``|r|^2 + |t|^2 <= 1`` and, for a symmetric two-port, the
    eigen-reflections ``|r + t|`` and ``|r - t|`` must not exceed 1 either.
    """

    position: float
    r: complex = DEFAULT_SLOT_R
    t: complex = DEFAULT_SLOT_T

    def __post_init__(self):
        r, t = complex(self.r), complex(self.t)
        if abs(r) ** 2 + abs(t) ** 2 > 1.0 + 1e-12:
            raise ValidationError(f"slot is not passive: |r|^2 + |t|^2 = {abs(r) ** 2 + abs(t) ** 2:.6g} > 1")
        if max(abs(r + t), abs(r - t)) > 1.0 + 1e-12:
            raise ValidationError(f"slot is not passive: |r +/- t| = {max(abs(r + t), abs(r - t)):.6g} > 1")
        if t == 0:
            raise ValidationError("slot with t = 0 blocks the guide; model it as a guide end instead")


def infinite_guide_projected(model: Plasmon1DModel, z_a: float, z_b: float) -> complex:
    """Scattered projected Green value ``i Gamma_pl exp(i k |z_a - z_b|)`` of an infinite guide."""
    return 1j * model.gamma_pl * np.exp(1j * model.k_complex * abs(z_a - z_b))


def _check_on_guide(model: FabryPerotModel, *zs: float) -> None:
    for z in zs:
        if not 0.0 <= z <= model.length:
            raise DomainError(f"position {z:.6g} m lies outside the guide [0, {model.length:.6g}] m")


def finite_guide_projected(model: FabryPerotModel, z_a: float, z_b: float) -> complex:
    """Scattered projected value on a finite guide, by summing mirror images."""
    za = z_a - model.base.axis_origin
    zb = z_b - model.base.axis_origin
    _check_on_guide(model, za, zb)
    value, _, converged = kernels.fabry_perot_sum(
        model.base.k_complex, complex(model.r_end), model.length, za, zb,
        IMAGE_SUM_REL_TOL, IMAGE_SUM_MAX_TERMS,
    )
    if not converged:
        raise DomainError("image series did not converge; propagation loss or |r_end| too close to lossless")
    return 1j * model.base.gamma_pl * value


def fabry_perot_closed_form(model: FabryPerotModel, z_a: float, z_b: float) -> complex:
    """Geometric-series resummation of the image sum (reference for tests and calibration)."""
    k = model.base.k_complex
    r = complex(model.r_end)
    length = model.length
    za = z_a - model.base.axis_origin
    zb = z_b - model.base.axis_origin
    dz = abs(za - zb)
    num = (np.exp(1j * k * dz) + r * np.exp(1j * k * (za + zb))
           + r * np.exp(1j * k * (2 * length - za - zb)) + r * r * np.exp(1j * k * (2 * length - dz)))
    return 1j * model.base.gamma_pl * num / (1.0 - r * r * np.exp(2j * k * length))


def _prop(k: complex, d: float) -> np.ndarray:
    return np.array([np.exp(1j * k * d), np.exp(-1j * k * d)])


def _slot_forward(r: complex, t: complex) -> np.ndarray:
    # (a, b) just left of the slot -> (a, b) just right of it
    return np.array([[t * t - r * r, r], [-r, 1.0]]) / t


def _slot_backward(r: complex, t: complex) -> np.ndarray:
    return np.array([[1.0, -r], [r, t * t - r * r]]) / t


def _state_from_left(k, z, left_pos, left_state, slots):
    state = left_state.astype(complex)
    pos = left_pos
    for s in slots:
        if s.position >= z:
            break
        state = _prop(k, s.position - pos) * state
        state = _slot_forward(complex(s.r), complex(s.t)) @ state
        pos = s.position
    return _prop(k, z - pos) * state


def _state_from_right(k, z, right_pos, right_state, slots):
    state = right_state.astype(complex)
    pos = right_pos
    for s in reversed(slots):
        if s.position < z:
            break
        state = _prop(k, s.position - pos) * state
        state = _slot_backward(complex(s.r), complex(s.t)) @ state
        pos = s.position
    return _prop(k, z - pos) * state


def slotted_unit_green(k: complex, z_src: float, z_obs: float, slots: Sequence[SlotScatterer],
                       length: float | None = None, r_end: complex = 0.0) -> complex:
    """Unit 1D Green function with lumped scatterers, by transfer matrices.

    Coordinates are relative to the guide origin. ``length=None`` means an
    infinite guide; otherwise ends at ``0`` and ``length`` reflect with
    ``r_end``. A site exactly on a slot is treated as sitting just left of it.
    States are ``(a, b)`` amplitudes of the right- and left-moving waves.
    """
    slots = sorted(slots, key=lambda s: s.position)
    positions = [s.position for s in slots]
    if len(set(positions)) != len(positions):
        raise ConfigurationError("two slots share the same position")
    if length is None:
        everything = positions + [z_src, z_obs]
        left_pos, right_pos = min(everything), max(everything)
        left_state = np.array([0.0, 1.0])
        right_state = np.array([1.0, 0.0])
    else:
        for p in positions:
            if not 0.0 < p < length:
                raise ConfigurationError(f"slot at {p:.6g} m is not strictly inside the guide")
        left_pos, right_pos = 0.0, length
        left_state = np.array([r_end, 1.0])
        right_state = np.array([1.0, r_end])

    u = _state_from_left(k, z_src, left_pos, left_state, slots)
    w = _state_from_right(k, z_src, right_pos, right_state, slots)
    # gamma w - beta u = (1, -1): unit outgoing waves on both sides of the source
    system = np.array([[w[0], -u[0]], [w[1], -u[1]]])
    gam, beta = np.linalg.solve(system, np.array([1.0, -1.0], dtype=complex))
    if z_obs <= z_src:
        obs = beta * _state_from_left(k, z_obs, left_pos, left_state, slots)
    else:
        obs = gam * _state_from_right(k, z_obs, right_pos, right_state, slots)
    return complex(obs[0] + obs[1])


def slotted_guide_projected(model: Plasmon1DModel | FabryPerotModel, slots: Sequence[SlotScatterer],
                            z_a: float, z_b: float) -> complex:
    """Scattered projected value on a guide carrying coupling slots."""
    if isinstance(model, FabryPerotModel):
        base = model.base
        za, zb = z_a - base.axis_origin, z_b - base.axis_origin
        _check_on_guide(model, za, zb)
        length, r_end = model.length, complex(model.r_end)
    else:
        base = model
        za, zb = z_a - base.axis_origin, z_b - base.axis_origin
        length, r_end = None, 0.0
    rel = [SlotScatterer(s.position - base.axis_origin, s.r, s.t) for s in slots]
    return 1j * base.gamma_pl * slotted_unit_green(base.k_complex, za, zb, rel, length, r_end)


# --------------------------------------------------------------------------- tabulated data


@dataclass(frozen=True)
class TabulatedGreenSet:
    """Projected Green values ``J_ij(omega)`` on a frequency grid (e.g. exported from a field solver)."""

    sites: Mapping[str, tuple[float, float, float]]
    frequencies: np.ndarray
    entries: Mapping[tuple[str, str], np.ndarray]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        if freqs.ndim != 1 or freqs.size == 0:
            raise ValidationError("frequency grid must be a non-empty 1D array")
        if np.any(np.diff(freqs) <= 0):
            raise ValidationError("frequency grid must be strictly increasing")
        labels = list(self.sites)
        for i in labels:
            for j in labels:
                if (i, j) not in self.entries:
                    raise ValidationError(f"missing entries for site pair ({i}, {j})")
        for (i, j), vals in self.entries.items():
            if i not in self.sites or j not in self.sites:
                raise ValidationError(f"entries reference undeclared site pair ({i}, {j})")
            if np.shape(vals) != freqs.shape:
                raise ValidationError(f"site pair ({i}, {j}) does not cover every grid frequency")
            if i == j:
                bad = np.nonzero(np.asarray(vals).imag < 0)[0]
                if bad.size:
                    raise ValidationError(
                        f"passivity violated: Im J({i},{i}) = {vals[bad[0]].imag:.6g} < 0 "
                        f"at omega = {freqs[bad[0]]:.12g} rad/s")

    @property
    def fields(self) -> str:
        return self.metadata.get("field", "total")


def tabulated_projected(table: TabulatedGreenSet, site_a: str, site_b: str, omega: float) -> complex:
    """Linear interpolation in omega of the stored values; grid hits are returned unchanged."""
    try:
        vals = table.entries[(site_a, site_b)]
    except KeyError:
        raise ValidationError(f"unknown site pair ({site_a}, {site_b})") from None
    freqs = np.asarray(table.frequencies)
    if not freqs[0] <= omega <= freqs[-1]:
        raise DomainError(f"omega = {omega:.12g} rad/s outside tabulated range "
                          f"[{freqs[0]:.12g}, {freqs[-1]:.12g}]; extrapolation refused")
    idx = int(np.searchsorted(freqs, omega))
    if freqs[idx] == omega:
        return complex(vals[idx])
    w = (omega - freqs[idx - 1]) / (freqs[idx] - freqs[idx - 1])
    return complex((1.0 - w) * vals[idx - 1] + w * vals[idx])


# --------------------------------------------------------------------------- providers


class GreenProvider(abc.ABC):
    """Maps two sites and a frequency to a projected Green value."""

    #: whether the value is only the scattered part (free space must be added for totals)
    scattered_only: bool = True

    @abc.abstractmethod
    def projected(self, site_a: Site, site_b: Site, omega: float, dipole) -> ProjectedGreen:
        ...

    def _wrap(self, value: complex, site_a: Site, site_b: Site, omega: float) -> ProjectedGreen:
        return ProjectedGreen(complex(value), site_a.label, site_b.label, omega)


class FreeSpace(GreenProvider):
    scattered_only = False

    def projected(self, site_a, site_b, omega, dipole):
        return free_space_projected(dipole, site_a.position, site_b.position, omega,
                                    coincident=site_a.position == site_b.position,
                                    labels=(site_a.label, site_b.label))


@dataclass(frozen=True)
class InfiniteGuide(GreenProvider):
    model: Plasmon1DModel

    def projected(self, site_a, site_b, omega, dipole):
        return self._wrap(infinite_guide_projected(self.model, site_a.z, site_b.z), site_a, site_b, omega)


@dataclass(frozen=True)
class FiniteGuide(GreenProvider):
    model: FabryPerotModel

    def projected(self, site_a, site_b, omega, dipole):
        return self._wrap(finite_guide_projected(self.model, site_a.z, site_b.z), site_a, site_b, omega)


@dataclass(frozen=True)
class SlottedGuide(GreenProvider):
    model: Plasmon1DModel | FabryPerotModel
    slots: tuple[SlotScatterer, ...] = ()

    def projected(self, site_a, site_b, omega, dipole):
        value = slotted_guide_projected(self.model, self.slots, site_a.z, site_b.z)
        return self._wrap(value, site_a, site_b, omega)


@dataclass(frozen=True)
class Tabulated(GreenProvider):
    table: TabulatedGreenSet

    @property
    def scattered_only(self) -> bool:  # type: ignore[override]
        return self.table.fields == "scattered"

    def projected(self, site_a, site_b, omega, dipole):
        return self._wrap(tabulated_projected(self.table, site_a.label, site_b.label, omega),
                          site_a, site_b, omega)
