import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from plasmon_entangle import dynamics
from plasmon_entangle.dynamics import (
    SIGMA_A,
    SIGMA_B,
    PumpConfig,
    basis_transform,
    build_liouvillian,
    evolve,
    projector,
    steady_state,
    transient_states,
    unvec,
    vec,
)
from plasmon_entangle.errors import SteadyStateError, ValidationError
from plasmon_entangle.rates import RateMatrix

TRACE_ROW = np.zeros(16)
TRACE_ROW[[0, 5, 10, 15]] = 1.0

rates_strategy = st.tuples(st.floats(0.2, 3.0), st.floats(-0.95, 0.95), st.floats(-3.0, 3.0)).map(
    lambda x: RateMatrix.symmetric(x[0], x[1] * x[0], x[2]))


def random_state(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def test_vec_is_column_stacking():
    rho = np.arange(16).reshape(4, 4).astype(complex)
    assert np.array_equal(vec(rho)[:4], rho[:, 0])
    assert np.array_equal(unvec(vec(rho)), rho)


def test_collective_basis_round_trip(rng):
    rho = random_state(rng)
    coll = basis_transform(rho, "to_collective")
    assert np.allclose(basis_transform(coll, "to_product"), rho)
    plus = (projector("eg") + projector("ge") + np.outer(dynamics.ket("eg"), dynamics.ket("ge"))
            + np.outer(dynamics.ket("ge"), dynamics.ket("eg"))) / 2
    assert basis_transform(plus)[1, 1] == pytest.approx(1.0)


@given(rates_strategy, st.floats(0, 1), st.floats(-2, 2), st.floats(-1, 1))
def test_generator_preserves_trace_and_hermiticity(rates, gamma, rabi, detuning):
    pump = PumpConfig(rabi, 0.3 * rabi, detuning, -detuning)
    lv = build_liouvillian(rates, (gamma, 0.5 * gamma), pump)
    assert np.allclose(TRACE_ROW @ lv.matrix, 0.0, atol=1e-12)
    rng = np.random.default_rng(0)
    rho = random_state(rng)
    d = lv.apply(rho)
    assert np.allclose(d, d.conj().T, atol=1e-12)


def test_dissipator_matches_explicit_lindblad_form(rng):
    rates = RateMatrix(1.3, 0.7, -0.5, -0.5, 0.4, 0.4)
    rho = random_state(rng)
    s = (SIGMA_A, SIGMA_B)
    gm = rates.decay_matrix
    expected = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            x = s[i].conj().T @ s[j]
            expected += 0.5 * gm[i, j] * (2 * s[i] @ rho @ s[j].conj().T - x @ rho - rho @ x)
    h = -(rates.g_ab * s[0].conj().T @ s[1] + rates.g_ba * s[1].conj().T @ s[0])
    expected += -1j * (h @ rho - rho @ h)
    assert np.allclose(build_liouvillian(rates).apply(rho), expected, atol=1e-14)


def test_dephasing_adds_to_self_decay():
    rates = RateMatrix.symmetric(1.0, -0.4, 0.3)
    a = build_liouvillian(rates, (0.2, 0.2)).matrix
    b = build_liouvillian(RateMatrix(1.2, 1.2, -0.4, -0.4, 0.3, 0.3)).matrix
    assert np.allclose(a, b, atol=1e-15)


def test_evolve_matches_matrix_exponential(rng):
    rates = RateMatrix(1.0, 0.8, 0.5, 0.5, -0.7, -0.7)
    lv = build_liouvillian(rates, (0.1, 0.0), PumpConfig(0.6, 0.2j, 0.3, -0.1))
    rho0 = random_state(rng)
    times = np.linspace(0, 8, 41)
    traj = evolve(lv, rho0, times)
    for t, rho in zip(times, traj.states):
        ref = unvec(scipy.linalg.expm(lv.matrix * t) @ vec(rho0))
        assert np.max(np.abs(rho - ref)) < 1e-9


def test_rotating_frame_matches_lab_frame():
    """Laser-frame generator against a lab-frame integration with an explicit carrier."""
    w_q, w_l = 40.0, 38.5
    rabi = 0.7 * np.exp(0.3j)
    rates = RateMatrix.symmetric(1.0, -0.4, 0.6)
    n_op = SIGMA_A.conj().T @ SIGMA_A + SIGMA_B.conj().T @ SIGMA_B
    pump = PumpConfig(rabi, -rabi, w_q - w_l, w_q - w_l, "antisymmetric")
    lv = build_liouvillian(rates, pump=pump)
    diss = build_liouvillian(rates).matrix  # dissipator plus exchange, frame independent
    eye = np.eye(4)

    def rhs(t, y):
        drive = rabi * np.exp(-1j * w_l * t) * (SIGMA_A.conj().T - SIGMA_B.conj().T)
        h = w_q * n_op - (drive + drive.conj().T)
        lh = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
        return (diss + lh) @ y

    rho0 = projector("eg")
    t_end = 3.0
    sol = solve_ivp(rhs, (0, t_end), vec(rho0), method="DOP853", rtol=1e-11, atol=1e-13)
    rho_lab = unvec(sol.y[:, -1])
    u = scipy.linalg.expm(1j * w_l * t_end * n_op)
    rho_rot = u @ rho_lab @ u.conj().T
    ours = evolve(lv, rho0, [0.0, t_end]).states[-1]
    assert np.max(np.abs(ours - rho_rot)) < 1e-8


def test_analytic_transient_matches_integration(groove_rates):
    times = np.linspace(0, 10 / groove_rates.gamma_aa, 201)
    traj = evolve(build_liouvillian(groove_rates), projector("eg"), times)
    assert np.max(np.abs(traj.states - transient_states(groove_rates, 0.0, times))) < 1e-8


def test_trajectory_helpers(groove_rates):
    times = np.linspace(0, 2 / groove_rates.gamma_aa, 5)
    traj = evolve(build_liouvillian(groove_rates), projector("eg"), times)
    assert traj.t_scaled[-1] == pytest.approx(2.0)
    assert traj.population("eg")[0] == 1.0
    assert np.allclose(traj.population("ee"), 0.0, atol=1e-14)
    assert traj.concurrence[0] == pytest.approx(0.0, abs=1e-12)


def test_evolve_input_validation(groove_rates):
    lv = build_liouvillian(groove_rates)
    with pytest.raises(ValidationError):
        evolve(lv, np.eye(4), [0, 1])  # trace 4
    with pytest.raises(ValidationError):
        evolve(lv, projector("eg"), [1.0, 0.5])


def test_pump_regimes():
    assert PumpConfig.from_regime("symmetric", 0.2).rabi_b == 0.2
    assert PumpConfig.from_regime("antisymmetric", 0.2).rabi_b == -0.2
    assert PumpConfig.from_regime("asymmetric", 0.2).rabi_b == 0
    with pytest.raises(ValidationError):
        PumpConfig(0.2, 0.1, regime="symmetric")
    with pytest.raises(ValidationError):
        PumpConfig.from_regime("custom", 0.2)


def test_unpumped_steady_state_is_ground(groove_rates):
    rho, diag = steady_state(build_liouvillian(groove_rates), return_diagnostics=True)
    assert np.max(np.abs(rho - projector("gg"))) < 1e-10
    assert diag.gap_ratio > 1e-3


def test_dark_state_makes_steady_state_non_unique():
    with pytest.raises(SteadyStateError):
        steady_state(build_liouvillian(RateMatrix.symmetric(1.0, 1.0, 0.0)))


def test_symmetric_pump_gives_equal_populations(groove_rates):
    pump = PumpConfig.from_regime("symmetric", 0.3 * groove_rates.gamma_aa)
    rho = steady_state(build_liouvillian(groove_rates, pump=pump))
    assert abs(rho[1, 1] - rho[2, 2]) < 1e-9


def test_asymmetric_pump_favours_driven_qubit(groove_rates):
    pump = PumpConfig.from_regime("asymmetric", 0.3 * groove_rates.gamma_aa)
    rho = steady_state(build_liouvillian(groove_rates, pump=pump))
    assert rho[1, 1].real > rho[2, 2].real


def test_spectral_gap_of_unpumped_pair(groove_rates):
    # slowest mode is the |gg><-| coherence, at half the subradiant decay rate
    gap = dynamics.spectral_gap(build_liouvillian(groove_rates))
    assert gap == pytest.approx(0.5 * (groove_rates.gamma_aa + groove_rates.gamma_ab), rel=1e-9)
