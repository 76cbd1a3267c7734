"""Wootters concurrence of two-qubit states."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import NumericalError, ValidationError
from .rates import RateMatrix

EIG_CLAMP_TOL = 1e-8  # matches the integrator's invariant-correction budget
MIN_SCAN_POINTS = 10_000
GOLDEN_RTOL = 1e-6


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """``(sigma_y x sigma_y) rho* (sigma_y x sigma_y)``; also works on stacks."""
    rho = np.asarray(rho, dtype=complex)
    return kernels.SIGMA_YY @ rho.conj() @ kernels.SIGMA_YY


def concurrence_series(states: np.ndarray) -> np.ndarray:
    """Concurrence of each state in an ``(N, 4, 4)`` stack."""
    states = np.ascontiguousarray(states, dtype=complex)
    if states.ndim != 3 or states.shape[1:] != (4, 4):
        raise ValidationError(f"expected an (N, 4, 4) stack, got {states.shape}")
    values, max_imag, min_real = kernels.concurrence_batch(states)
    if max_imag > EIG_CLAMP_TOL:
        raise NumericalError(f"rho rho~ has an eigenvalue with imaginary part {max_imag:.3g}; input is not a valid state")
    if min_real < -EIG_CLAMP_TOL:
        raise NumericalError(f"rho rho~ has a negative eigenvalue {min_real:.3g}; input is not a valid state")
    return values


def concurrence_general(rho: np.ndarray) -> float:
    """``max(0, sqrt(u1) - sqrt(u2) - sqrt(u3) - sqrt(u4))`` from the eigenvalues of ``rho rho~``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 matrix, got {rho.shape}")
    return float(concurrence_series(rho[None])[0])


def concurrence_closed_form(rho_pp, rho_mm, rho_pm):
    """Concurrence of a state living in the single-excitation manifold plus ``|gg>``.

    Inputs are collective-basis elements; valid only when ``rho_ee = 0``.
    """
    rho_pm = np.asarray(rho_pm, dtype=complex)
    return np.sqrt((np.asarray(rho_pp).real - np.asarray(rho_mm).real) ** 2 + 4.0 * rho_pm.imag**2)


def transient_concurrence(rates: RateMatrix, gamma: float, t) -> np.ndarray:
    """Closed-form concurrence of the unpumped transient starting from ``|eg>``.

    ``C(t) = exp(-G' t)/2 sqrt[(exp(-G_ab t) - exp(G_ab t))^2 + 4 sin^2(2 g_ab t)]``
    with ``G' = Gamma_aa + gamma``.
    """
    if not rates.is_symmetric:
        raise ValidationError("closed-form transient needs symmetric rates")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return kernels.transient_curve(rates.gamma_aa + gamma, rates.gamma_ab, rates.g_ab, np.ascontiguousarray(t))


class PeakConcurrence(NamedTuple):
    t_peak: float
    c_peak: float
    degenerate: bool


def _golden_max(f, lo: float, hi: float, xtol: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def peak_concurrence(rates: RateMatrix, gamma: float, horizon: float,
                     n_scan: int = MIN_SCAN_POINTS) -> PeakConcurrence:
    """Maximum of the closed-form transient concurrence over ``(0, horizon]``.

    A dense scan locates the best sample; golden-section search on the
    bracketing interval refines the time to ``1e-6`` relative accuracy.
    """
    if horizon <= 0:
        raise ValidationError("horizon must be positive")
    n_scan = max(int(n_scan), MIN_SCAN_POINTS)
    t = np.linspace(0.0, horizon, n_scan + 1)[1:]
    c = transient_concurrence(rates, gamma, t)
    best = int(np.argmax(c))
    if c[best] <= 0.0:
        return PeakConcurrence(float(t[0]), 0.0, True)
    lo = t[best - 1] if best > 0 else 0.0
    hi = t[min(best + 1, n_scan - 1)]

    def f(x):
        return float(transient_concurrence(rates, gamma, x)[0])

    t_star = _golden_max(f, lo, hi, GOLDEN_RTOL * t[best])
    c_star = f(t_star)
    if c_star < c[best]:
        t_star, c_star = float(t[best]), float(c[best])
    return PeakConcurrence(float(t_star), float(c_star), False)
