"""Two-qubit master equation: Liouvillian construction, time evolution and steady states.

States are 4x4 complex arrays in the product basis ``|ee>, |eg>, |ge>, |gg>``
(first letter is qubit a). Superoperators act on the column-stacked state,
``vec(A rho B) = (B^T kron A) vec(rho)``.

The pump enters in the frame rotating at the laser frequency, where the
generator is time independent:
``H / hbar = sum_a Delta_a s_a^+ s_a - (Omega_a s_a^+ + Omega_a^* s_a)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import IntegrationError, NumericalError, SteadyStateError, ValidationError
from .rates import RateMatrix

BASIS = ("ee", "eg", "ge", "gg")
COLLECTIVE_BASIS = ("3", "+", "-", "0")

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_TOL = 1e-10
CORRECTION_BUDGET = 1e-8
RTOL = 1e-9
ATOL = 1e-12
MAX_STEPS = 5_000_000
KERNEL_GAP_TOL = 1e-8
KERNEL_ZERO_TOL = 1e-10
RESIDUAL_TOL = 1e-10

_I2 = np.eye(2)
_I4 = np.eye(4)
_SIGMA = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |g><e| with e -> 0, g -> 1
SIGMA_A = np.kron(_SIGMA, _I2)
SIGMA_B = np.kron(_I2, _SIGMA)

_S = 1.0 / math.sqrt(2.0)
# columns are |3>, |+>, |->, |0> written in the product basis
COLLECTIVE_U = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, _S, _S, 0.0],
    [0.0, _S, -_S, 0.0],
    [0.0, 0.0, 0.0, 1.0],
], dtype=complex)


def ket(label: str) -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    v[BASIS.index(label)] = 1.0
    return v


def projector(label: str) -> np.ndarray:
    v = ket(label)
    return np.outer(v, v.conj())


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(16, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v).reshape(4, 4, order="F")


def check_density_matrix(rho, name: str = "state") -> np.ndarray:
    """Validate a 4x4 density matrix and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValidationError(f"{name} must be 4x4, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITICITY_TOL:
        raise ValidationError(f"{name} is not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"{name} trace is {tr.real:.15g}, expected 1")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -EIGENVALUE_TOL:
        raise ValidationError(f"{name} has a negative eigenvalue {lowest:.3g}")
    return rho


def basis_transform(rho: np.ndarray, direction: str = "to_collective") -> np.ndarray:
    """Change between the product basis and ``|3>, |+>, |->, |0>``.

    Works on a single 4x4 matrix or a stack of them.
    """
    rho = np.asarray(rho, dtype=complex)
    u = COLLECTIVE_U
    if direction == "to_collective":
        return u.conj().T @ rho @ u
    if direction == "to_product":
        return u @ rho @ u.conj().T
    raise ValidationError(f"unknown direction {direction!r}; use 'to_collective' or 'to_product'")


# --------------------------------------------------------------------------- pump


PUMP_REGIMES = ("symmetric", "antisymmetric", "asymmetric", "custom")


@dataclass(frozen=True)
class PumpConfig:
    """Coherent drive on each qubit; Rabi frequencies and detunings in rad/s."""

    rabi_a: complex
    rabi_b: complex
    detuning_a: float = 0.0
    detuning_b: float = 0.0
    regime: str = "custom"

    def __post_init__(self):
        if self.regime not in PUMP_REGIMES:
            raise ValidationError(f"unknown pump regime {self.regime!r}")
        a, b = complex(self.rabi_a), complex(self.rabi_b)
        ok = {
            "symmetric": a == b,
            "antisymmetric": a == -b,
            "asymmetric": b == 0,
            "custom": True,
        }[self.regime]
        if not ok:
            raise ValidationError(f"Rabi frequencies ({a}, {b}) are inconsistent with regime {self.regime!r}")

    @classmethod
    def from_regime(cls, regime: str, rabi: complex, detuning: float = 0.0) -> "PumpConfig":
        partner = {"symmetric": rabi, "antisymmetric": -rabi, "asymmetric": 0.0}
        if regime not in partner:
            raise ValidationError(f"regime {regime!r} needs both Rabi frequencies; build PumpConfig directly")
        return cls(rabi, partner[regime], detuning, detuning, regime)

    def hamiltonian(self) -> np.ndarray:
        """Laser-frame Hamiltonian divided by hbar."""
        h = self.detuning_a * SIGMA_A.conj().T @ SIGMA_A + self.detuning_b * SIGMA_B.conj().T @ SIGMA_B
        for rabi, s in ((complex(self.rabi_a), SIGMA_A), (complex(self.rabi_b), SIGMA_B)):
            h = h - (rabi * s.conj().T + np.conj(rabi) * s)
        return h


# --------------------------------------------------------------------------- Liouvillian


def _spre(a):
    return np.kron(_I4, a)


def _spost(b):
    return np.kron(b.T, _I4)


def _pair_dissipator(rate, s_alpha, s_beta):
    # rate/2 (2 s_a rho s_b^+ - s_a^+ s_b rho - rho s_a^+ s_b)
    x = s_alpha.conj().T @ s_beta
    return 0.5 * rate * (2.0 * np.kron(s_beta.conj(), s_alpha) - _spre(x) - _spost(x))


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray
    rates: RateMatrix
    dephasing: tuple[float, float] = (0.0, 0.0)
    pump: PumpConfig | None = None

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho))

    @property
    def time_scale(self) -> float:
        """``1 / Gamma_aa`` in seconds (1 when there is no self decay)."""
        return 1.0 / self.rates.gamma_aa if self.rates.gamma_aa > 0 else 1.0


def build_liouvillian(rates: RateMatrix, dephasing: tuple[float, float] = (0.0, 0.0),
                      pump: PumpConfig | None = None) -> Liouvillian:
    """Assemble the 16x16 generator from rates, extra per-qubit decay and an optional pump.

    The dephasing channel has the same Lindblad form as spontaneous decay on
    each qubit separately, so it adds ``gamma_a`` to the effective self rate.
    The reservoir-mediated exchange enters as ``+i[g_ab s_a^+ s_b + g_ba s_b^+ s_a, rho]``.
    """
    if not isinstance(rates, RateMatrix):
        raise ValidationError("rates must be a validated RateMatrix")
    gam_a, gam_b = (float(x) for x in dephasing)
    if gam_a < 0 or gam_b < 0:
        raise ValidationError("dephasing rates must be non-negative")
    sig = (SIGMA_A, SIGMA_B)
    gmat = rates.decay_matrix
    lmat = np.zeros((16, 16), dtype=complex)
    for i in range(2):
        for j in range(2):
            if gmat[i, j] != 0.0:
                lmat += _pair_dissipator(gmat[i, j], sig[i], sig[j])
    for rate, s in ((gam_a, SIGMA_A), (gam_b, SIGMA_B)):
        if rate:
            lmat += _pair_dissipator(rate, s, s)
    exchange = rates.g_ab * SIGMA_A.conj().T @ SIGMA_B + rates.g_ba * SIGMA_B.conj().T @ SIGMA_A
    lmat += 1j * (_spre(exchange) - _spost(exchange))
    if pump is not None:
        h = pump.hamiltonian()
        lmat += -1j * (_spre(h) - _spost(h))
    return Liouvillian(lmat, rates, (gam_a, gam_b), pump)


# --------------------------------------------------------------------------- evolution


@dataclass(frozen=True)
class Trajectory:
    """Sampled states; ``times`` in seconds, ``time_scale`` is ``1 / Gamma_aa``."""

    times: np.ndarray
    states: np.ndarray
    time_scale: float = 1.0
    max_correction: float = 0.0
    n_steps: int = 0

    @property
    def t_scaled(self) -> np.ndarray:
        return self.times / self.time_scale

    def population(self, label: str) -> np.ndarray:
        i = BASIS.index(label)
        return self.states[:, i, i].real

    @cached_property
    def concurrence(self) -> np.ndarray:
        from .entanglement import concurrence_series

        return concurrence_series(self.states)


def evolve(liouvillian: Liouvillian, rho0, times, rtol: float = RTOL, atol: float = ATOL) -> Trajectory:
    """Integrate ``d rho / dt = L rho`` with an adaptive Dormand-Prince 5(4) scheme.

    ``times[0]`` is the time at which ``rho0`` is given. Each sample is
    projected back to a Hermitian, unit-trace matrix; if that projection
    moves any element by more than ``1e-8`` the integration is rejected.
    """
    rho0 = check_density_matrix(rho0, "initial state")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValidationError("times must be a non-empty 1D array")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValidationError("times must be sorted and start at t >= 0")
    raw, status, steps = kernels.dopri5_linear(
        np.ascontiguousarray(liouvillian.matrix), vec(rho0).copy(), times, rtol, atol, MAX_STEPS)
    if status == kernels.STATUS_UNDERFLOW:
        raise IntegrationError(f"step size underflow after {steps} steps (stiff or ill-scaled generator)")
    if status == kernels.STATUS_MAX_STEPS:
        raise IntegrationError(f"step budget of {MAX_STEPS} exhausted")
    states = raw.reshape(-1, 4, 4).transpose(0, 2, 1)  # column-stacked rows -> matrices
    herm = 0.5 * (states + states.conj().transpose(0, 2, 1))
    tr = np.trace(herm, axis1=1, axis2=2).real
    fixed = herm / tr[:, None, None]
    correction = float(np.max(np.abs(fixed - states)))
    if correction > CORRECTION_BUDGET:
        raise IntegrationError(f"invariant correction {correction:.3g} exceeds budget {CORRECTION_BUDGET:g}")
    lowest = float(np.min(np.linalg.eigvalsh(fixed)[:, 0]))
    if lowest < -CORRECTION_BUDGET:
        raise IntegrationError(f"trajectory left the state space (eigenvalue {lowest:.3g})")
    return Trajectory(times, fixed, liouvillian.time_scale, correction, int(steps))


def analytic_transient(rates: RateMatrix, gamma: float, t):
    """Single-excitation transient in the collective basis, starting from one excited emitter.

    Returns ``(rho_pp, rho_mm, rho_pm)``; arrays if ``t`` is an array.
    """
    if not rates.is_symmetric:
        raise ValidationError("analytic transient needs gamma_aa = gamma_bb and g_ab = g_ba")
    t = np.asarray(t, dtype=float)
    decay = rates.gamma_aa + gamma
    rho_pp = 0.5 * np.exp(-(decay + rates.gamma_ab) * t)
    rho_mm = 0.5 * np.exp(-(decay - rates.gamma_ab) * t)
    rho_pm = 0.5 * np.exp(-(decay - 2j * rates.g_ab) * t)
    return rho_pp, rho_mm, rho_pm


def transient_states(rates: RateMatrix, gamma: float, t) -> np.ndarray:
    """Full product-basis states ``(N, 4, 4)`` rebuilt from :func:`analytic_transient`."""
    pp, mm, pm = (np.atleast_1d(x) for x in analytic_transient(rates, gamma, t))
    coll = np.zeros((pp.size, 4, 4), dtype=complex)
    coll[:, 1, 1] = pp
    coll[:, 2, 2] = mm
    coll[:, 1, 2] = pm
    coll[:, 2, 1] = np.conj(pm)
    coll[:, 3, 3] = 1.0 - pp - mm
    return basis_transform(coll, "to_product")


@dataclass(frozen=True)
class KernelDiagnostics:
    singular_values: np.ndarray = field(repr=False)
    residual: float

    @property
    def gap_ratio(self) -> float:
        return float(self.singular_values[-2] / self.singular_values[0])


def steady_state(liouvillian: Liouvillian, return_diagnostics: bool = False):
    """Unique stationary state from ``L rho = 0`` with one row replaced by ``tr rho = 1``."""
    lmat = liouvillian.matrix
    sv = np.linalg.svd(lmat, compute_uv=False)
    if sv[0] == 0.0 or sv[-2] <= KERNEL_GAP_TOL * sv[0]:
        raise SteadyStateError("Liouvillian kernel is degenerate; steady state is not unique")
    if sv[-1] > KERNEL_ZERO_TOL * sv[0]:
        raise SteadyStateError(f"no numerical kernel (smallest singular value ratio {sv[-1] / sv[0]:.3g})")
    system = lmat.copy()
    system[0, :] = 0.0
    system[0, [0, 5, 10, 15]] = 1.0  # trace functional on the column-stacked state
    rhs = np.zeros(16, dtype=complex)
    rhs[0] = 1.0
    v = np.linalg.solve(system, rhs)
    residual = float(np.linalg.norm(lmat @ v))
    if residual > RESIDUAL_TOL * sv[0]:
        raise NumericalError(f"steady-state residual {residual:.3g} too large relative to |L| = {sv[0]:.3g}")
    rho = unvec(v)
    rho = 0.5 * (rho + rho.conj().T)
    rho = check_density_matrix(rho / np.trace(rho).real, "steady state")
    if return_diagnostics:
        return rho, KernelDiagnostics(sv, residual)
    return rho


def spectral_gap(liouvillian: Liouvillian) -> float:
    """Smallest decay rate ``-Re(lambda)`` over the non-zero Liouvillian eigenvalues."""
    ev = np.linalg.eigvals(liouvillian.matrix)
    ev = ev[np.argsort(np.abs(ev))][1:]
    return float(np.min(-ev.real))
