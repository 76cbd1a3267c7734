import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plasmon_entangle.dynamics import basis_transform, projector
from plasmon_entangle.entanglement import (
    concurrence_closed_form,
    concurrence_general,
    concurrence_series,
    peak_concurrence,
    spin_flip,
    transient_concurrence,
)
from plasmon_entangle.errors import NumericalError, ValidationError
from plasmon_entangle.rates import RateMatrix

PSI_MINUS = np.array([0, 1, -1, 0]) / math.sqrt(2)


def test_bell_and_product_states():
    assert concurrence_general(np.outer(PSI_MINUS, PSI_MINUS)) == pytest.approx(1.0, abs=1e-10)
    assert concurrence_general(projector("eg")) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("p, expected", [(0.5, 0.25), (1 / 3, 0.0), (0.2, 0.0), (0.9, 0.85)])
def test_werner_states(p, expected):
    rho = p * np.outer(PSI_MINUS, PSI_MINUS) + (1 - p) * np.eye(4) / 4
    assert concurrence_general(rho) == pytest.approx(expected, abs=1e-10)


def _haar_unitary(rng, n):
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_pure_states_match_two_abs_det(rng):
    for _ in range(50):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        expected = 2 * abs(psi[0] * psi[3] - psi[1] * psi[2])
        assert concurrence_general(np.outer(psi, psi.conj())) == pytest.approx(expected, abs=1e-9)


@given(st.integers(0, 10_000))
def test_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    u = np.kron(_haar_unitary(rng, 2), _haar_unitary(rng, 2))
    assert concurrence_general(u @ rho @ u.conj().T) == pytest.approx(concurrence_general(rho), abs=1e-8)


def test_spin_flip_of_bell_state_is_itself():
    bell = np.outer(PSI_MINUS, PSI_MINUS)
    assert np.allclose(spin_flip(bell), bell)


def test_closed_form_on_single_excitation_states(rng):
    for _ in range(100):
        pp, mm = rng.dirichlet([1, 1, 1])[:2]
        pm = math.sqrt(pp * mm) * rng.uniform() * np.exp(1j * rng.uniform(0, 2 * math.pi))
        coll = np.zeros((4, 4), dtype=complex)
        coll[1, 1], coll[2, 2], coll[1, 2], coll[2, 1] = pp, mm, pm, np.conj(pm)
        coll[3, 3] = 1 - pp - mm
        rho = basis_transform(coll, "to_product")
        assert concurrence_general(rho) == pytest.approx(float(concurrence_closed_form(pp, mm, pm)), abs=1e-10)


def test_invalid_states_raise():
    with pytest.raises(NumericalError):
        concurrence_general(np.diag([1.5, -0.5, 0, 0]).astype(complex))
    with pytest.raises(ValidationError):
        concurrence_series(np.zeros((3, 3)))


def test_transient_concurrence_starts_at_zero_and_decays(groove_rates):
    t = np.linspace(0, 40 / groove_rates.gamma_aa, 400)
    c = transient_concurrence(groove_rates, 0.0, t)
    assert c[0] == 0.0
    assert c[-1] < 1e-6
    assert np.all(c >= 0)


def test_peak_matches_dense_scan(wire_rates):
    horizon = 10 / wire_rates.gamma_aa
    pk = peak_concurrence(wire_rates, 0.0, horizon)
    t = np.linspace(0, horizon, 200_001)
    dense = transient_concurrence(wire_rates, 0.0, t)
    assert pk.c_peak >= dense.max() - 1e-12
    assert abs(pk.c_peak - dense.max()) < 1e-6
    assert not pk.degenerate


def test_degenerate_peak_without_coupling():
    pk = peak_concurrence(RateMatrix.symmetric(1.0, 0.0, 0.0), 0.0, 5.0)
    assert pk.degenerate and pk.c_peak == 0.0


def test_closed_form_needs_symmetric_rates():
    with pytest.raises(ValidationError):
        transient_concurrence(RateMatrix(1.0, 0.5, 0.1, 0.1, 0.0, 0.0), 0.0, [1.0])
