import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plasmon_entangle.errors import PositivityError, SingularityError, ValidationError
from plasmon_entangle.greens import FiniteGuide, FabryPerotModel, FreeSpace, InfiniteGuide, Plasmon1DModel
from plasmon_entangle.rates import QubitPair, RateMatrix, compute_rates, normalized_rates
from plasmon_entangle.units import DEBYE

OMEGA = 2 * math.pi * 500e12
D = 30 * DEBYE


def test_free_space_self_rate_is_gamma0():
    pair = QubitPair.on_axis(OMEGA, D, 0.0, 637.5e-9)
    r = compute_rates(pair, FreeSpace())
    assert r.gamma_aa == pytest.approx(pair.gamma0, rel=1e-13)
    assert r.gamma_bb == r.gamma_aa
    assert r.gamma_ab == pytest.approx(r.gamma_ba, rel=1e-13)
    assert abs(r.gamma_ab) < r.gamma_aa


def test_transverse_far_field_cross_rate():
    # d perpendicular to separation: Gamma_ab/Gamma0 = 3/2 [sin x/x + cos x/x^2 - sin x/x^3]
    sep = 637.5e-9
    pair = QubitPair.on_axis(OMEGA, D, 0.0, sep)
    x = OMEGA / 299792458.0 * sep
    expected = 1.5 * (math.sin(x) / x + math.cos(x) / x**2 - math.sin(x) / x**3)
    r = normalized_rates(compute_rates(pair, FreeSpace()), pair)
    assert r.gamma_ab == pytest.approx(expected, rel=1e-12)


def test_coincident_emitters_in_vacuum_have_no_coupling():
    pair = QubitPair.on_axis(OMEGA, D, 0.0, 0.0)
    with pytest.raises(SingularityError):
        compute_rates(pair, FreeSpace())


def test_guide_rates_add_vacuum_only_on_request():
    pair = QubitPair.on_axis(OMEGA, D, 0.0, 300e-9)
    model = Plasmon1DModel(425e-9, 1.7e-6, 5 * pair.gamma0)
    total = compute_rates(pair, InfiniteGuide(model))
    scattered = compute_rates(pair, InfiniteGuide(model), include_free_space=False)
    assert total.gamma_aa == pytest.approx(scattered.gamma_aa + pair.gamma0, rel=1e-13)
    assert scattered.gamma_aa == pytest.approx(5 * pair.gamma0, rel=1e-13)


def test_self_shift_is_dropped():
    pair = QubitPair.on_axis(OMEGA, D, 0.0, 300e-9)
    model = FabryPerotModel(Plasmon1DModel(425e-9, 1.7e-6, 5 * pair.gamma0), 400e-9, 0.6j)
    r = compute_rates(pair, FiniteGuide(model), include_free_space=False)
    assert set(r.as_tuple()) and len(r.as_tuple()) == 6


def test_positivity_violations():
    with pytest.raises(PositivityError):
        RateMatrix.symmetric(1.0, 1.5, 0.0)
    with pytest.raises(PositivityError):
        RateMatrix(-1.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(PositivityError):
        RateMatrix(1.0, 1.0, 0.5, 0.4, 0.0, 0.0)
    with pytest.raises(PositivityError):
        RateMatrix.symmetric(math.nan, 0.0, 0.0)


def test_positivity_error_carries_values():
    with pytest.raises(PositivityError) as exc:
        RateMatrix.symmetric(1.0, 2.0, 0.3)
    assert exc.value.values["gamma_ab"] == 2.0


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(-1, 1), st.floats(-5, 5))
def test_valid_rates_have_positive_semidefinite_decay_matrix(gaa, gbb, frac, g):
    gab = frac * math.sqrt(gaa * gbb)
    r = RateMatrix(gaa, gbb, gab, gab, g, g)
    assert np.linalg.eigvalsh(r.decay_matrix).min() >= -1e-12 * gaa


def test_pair_validation():
    with pytest.raises(ValidationError):
        QubitPair.on_axis(-1.0, D, 0, 1e-7)
    with pytest.raises(ValidationError):
        QubitPair.on_axis(OMEGA, 0.0, 0, 1e-7)
    with pytest.raises(ValidationError):
        QubitPair.on_axis(OMEGA, D, 0, 1e-7, dephasing=-1.0)


def test_scaling_the_dipole_scales_vacuum_rates_quadratically():
    pair = QubitPair.on_axis(OMEGA, D, 0.0, 400e-9)
    r1 = compute_rates(pair, FreeSpace())
    r2 = compute_rates(pair.scaled_dipole(2.0), FreeSpace())
    assert np.allclose(np.array(r2.as_tuple()), 4 * np.array(r1.as_tuple()), rtol=1e-12)
    assert normalized_rates(r2, pair.scaled_dipole(2.0)).as_tuple() == pytest.approx(
        normalized_rates(r1, pair).as_tuple(), rel=1e-12)
