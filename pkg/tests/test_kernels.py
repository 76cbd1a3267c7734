"""The numba-compiled kernels and their numpy fallbacks must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.linalg

from plasmon_entangle import _accel, kernels
from plasmon_entangle.dynamics import build_liouvillian, projector, vec
from plasmon_entangle.rates import RateMatrix

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")

PATHS = {
    "numpy": (kernels._dopri5_linear_numpy, kernels._fabry_perot_sum_numpy,
              kernels._concurrence_batch_numpy, kernels._transient_curve_numpy),
    "numba": (kernels._dopri5_linear_numba, kernels._fabry_perot_sum_numba,
              kernels._concurrence_batch_numba, kernels._transient_curve_numba),
}


@pytest.fixture(params=["numpy", "numba"])
def path(request):
    if request.param == "numba" and not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    return PATHS[request.param]


def _generator():
    return build_liouvillian(RateMatrix.symmetric(1.0, -0.5, 0.5), (0.1, 0.1)).matrix


def test_dopri5_against_expm(path):
    lmat = np.ascontiguousarray(_generator())
    y0 = vec(projector("eg")).copy()
    t = np.linspace(0, 6, 13)
    out, status, steps = path[0](lmat, y0, t, 1e-9, 1e-12, 100_000)
    assert status == kernels.STATUS_OK and steps > 0
    ref = np.array([scipy.linalg.expm(lmat * ti) @ y0 for ti in t])
    assert np.max(np.abs(out - ref)) < 1e-9


def test_dopri5_step_budget(path):
    lmat = np.ascontiguousarray(_generator())
    out, status, _ = path[0](lmat, vec(projector("eg")).copy(), np.array([0.0, 100.0]), 1e-9, 1e-12, 3)
    assert status == kernels.STATUS_MAX_STEPS


def test_fabry_perot_sum_converges(path):
    k = complex(2 * np.pi / 425e-9, 0.5 / 1.7e-6)
    value, n, ok = path[1](k, 0.6j, 637.5e-9, 0.0, 637.5e-9, 1e-12, 100_000)
    assert ok and n > 1
    r = 0.6j
    base = (np.exp(1j * k * 637.5e-9) + r * np.exp(1j * k * 637.5e-9) + r * np.exp(1j * k * 637.5e-9)
            + r * r * np.exp(1j * k * 637.5e-9))
    assert value == pytest.approx(base / (1 - r * r * np.exp(2j * k * 637.5e-9)), rel=1e-11)


def test_concurrence_batch_shapes(path):
    psi = np.array([0, 1, 1, 0]) / np.sqrt(2)
    states = np.stack([np.outer(psi, psi), np.eye(4) / 4]).astype(complex)
    values, max_imag, min_real = path[2](states)
    assert values == pytest.approx([1.0, 0.0], abs=1e-12)
    assert max_imag < 1e-12 and min_real > -1e-12


@needs_numba
def test_paths_agree(rng):
    lmat = np.ascontiguousarray(_generator())
    t = np.linspace(0, 10, 101)
    y0 = vec(projector("eg")).copy()
    a = kernels._dopri5_linear_numpy(lmat, y0, t, 1e-9, 1e-12, 100_000)
    b = kernels._dopri5_linear_numba(lmat, y0, t, 1e-9, 1e-12, 100_000)
    assert a[1] == b[1] and a[2] == b[2]
    assert np.max(np.abs(a[0] - b[0])) < 1e-13

    m = rng.normal(size=(20, 4, 4)) + 1j * rng.normal(size=(20, 4, 4))
    states = m @ m.conj().transpose(0, 2, 1)
    states /= np.trace(states, axis1=1, axis2=2)[:, None, None]
    ca = kernels._concurrence_batch_numpy(states)[0]
    cb = kernels._concurrence_batch_numba(np.ascontiguousarray(states))[0]
    assert np.allclose(ca, cb, atol=1e-12)

    tt = np.linspace(0, 20, 500)
    assert np.allclose(kernels._transient_curve_numpy(1.0, -0.4, 0.3, tt),
                       kernels._transient_curve_numba(1.0, -0.4, 0.3, tt), atol=1e-15)

    k = complex(2 * np.pi / 425e-9, 0.5 / 1.7e-6)
    fa = kernels._fabry_perot_sum_numpy(k, -0.6, 700e-9, 1e-7, 6e-7, 1e-12, 100_000)
    fb = kernels._fabry_perot_sum_numba(k, -0.6, 700e-9, 1e-7, 6e-7, 1e-12, 100_000)
    assert fa[0] == pytest.approx(fb[0], rel=1e-14) and fa[1] == fb[1]


def test_env_flag_selects_numpy_fallback():
    env = dict(os.environ, PLASMON_ENTANGLE_DISABLE_NUMBA="1")
    code = ("from plasmon_entangle import kernels, _accel;"
            "print(_accel.USE_NUMBA, kernels.dopri5_linear is kernels._dopri5_linear_numpy)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
