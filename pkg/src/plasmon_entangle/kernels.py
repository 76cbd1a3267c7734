"""Hot numerical kernels.

Every kernel exists twice: a ``*_numpy`` implementation and a ``*_numba``
compiled twin. The module-level name without suffix is whichever of the two
``_accel.select`` picks (numba unless ``PLASMON_ENTANGLE_DISABLE_NUMBA`` is set).
Where the loop structure is the same in both, the numba twin is simply the
compiled numpy source.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit, select

# Dormand-Prince 5(4) tableau with Shampine's free 4th-order interpolant.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_DP_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
])
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_DP_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
_DP_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2


def _dopri5_linear_numpy(lmat, y0, t_eval, rtol, atol, max_steps):
    """Integrate ``dy/dt = lmat @ y`` and sample ``y`` at ``t_eval``.

    ``t_eval[0]`` is the initial time. Returns ``(samples, status, n_steps)``;
    status is one of the ``STATUS_*`` codes.
    """
    n = y0.shape[0]
    m = t_eval.shape[0]
    out = np.zeros((m, n), dtype=np.complex128)
    out[0, :] = y0
    t = t_eval[0]
    t_end = t_eval[m - 1]
    y = y0.copy()
    k = np.zeros((7, n), dtype=np.complex128)
    k[0, :] = np.dot(lmat, y)

    idx = 1
    while idx < m and t_eval[idx] <= t:
        out[idx, :] = y
        idx += 1
    if idx >= m:
        return out, STATUS_OK, 0

    scale_l = np.max(np.abs(lmat))
    if scale_l == 0.0:
        for j in range(idx, m):
            out[j, :] = y
        return out, STATUS_OK, 0
    h = 0.01 / scale_l
    theta_pows = np.zeros(4)
    steps = 0
    while idx < m:
        if steps >= max_steps:
            return out, STATUS_MAX_STEPS, steps
        last = False
        if h >= t_end - t:
            h = t_end - t
            last = True
        if h <= 1e-14 * max(abs(t), abs(t_end)) or h <= 0.0:
            return out, STATUS_UNDERFLOW, steps

        for s in range(1, 6):
            acc = y.copy()
            for j in range(s):
                acc += (h * _DP_A[s, j]) * k[j]
            k[s, :] = np.dot(lmat, acc)
        y_new = y.copy()
        for j in range(6):
            y_new += (h * _DP_B[j]) * k[j]
        k[6, :] = np.dot(lmat, y_new)

        err = np.zeros(n, dtype=np.complex128)
        for j in range(7):
            err += (h * _DP_E[j]) * k[j]
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = np.sqrt(np.mean(np.abs(err / sc) ** 2))
        steps += 1

        if err_norm < 1.0:
            t_new = t_end if last else t + h
            while idx < m and t_eval[idx] <= t_new:
                if t_eval[idx] == t_new:
                    out[idx, :] = y_new
                else:
                    theta = (t_eval[idx] - t) / h
                    theta_pows[0] = theta
                    theta_pows[1] = theta * theta
                    theta_pows[2] = theta_pows[1] * theta
                    theta_pows[3] = theta_pows[2] * theta
                    q = np.dot(_DP_P, theta_pows)
                    acc = y.copy()
                    for j in range(7):
                        acc += (h * q[j]) * k[j]
                    out[idx, :] = acc
                idx += 1
            t = t_new
            y = y_new
            k[0, :] = k[6, :]
            if err_norm == 0.0:
                factor = 10.0
            else:
                factor = min(10.0, 0.9 * err_norm ** -0.2)
            h *= factor
        else:
            h *= max(0.2, 0.9 * err_norm ** -0.2)
    return out, STATUS_OK, steps


_dopri5_linear_numba = njit(_dopri5_linear_numpy)
dopri5_linear = select(_dopri5_linear_numba, _dopri5_linear_numpy)


def _fabry_perot_sum_numpy(k_cplx, r_end, length, z_a, z_b, rel_tol, max_terms):
    """Multiple-reflection image sum of the unit 1D Green function between two mirrors.

    Mirrors sit at ``z = 0`` and ``z = length`` with reflection ``r_end``.
    Each round trip multiplies the four base paths by ``r_end**2 exp(2ik L)``;
    summation stops once the next round-trip term is below ``rel_tol`` of the
    running total. Returns ``(value, n_round_trips, converged)``.
    """
    dz = abs(z_a - z_b)
    base = np.exp(1j * k_cplx * dz)
    base += r_end * np.exp(1j * k_cplx * (z_a + z_b))
    base += r_end * np.exp(1j * k_cplx * (2.0 * length - z_a - z_b))
    base += r_end * r_end * np.exp(1j * k_cplx * (2.0 * length - dz))
    q = r_end * r_end * np.exp(2j * k_cplx * length)
    total = base
    term = base
    n = 0
    while n < max_terms:
        term = term * q
        n += 1
        if abs(term) < rel_tol * abs(total) or abs(term) == 0.0:
            total += term
            return total, n, True
        total += term
    return total, n, False


_fabry_perot_sum_numba = njit(_fabry_perot_sum_numpy)
fabry_perot_sum = select(_fabry_perot_sum_numba, _fabry_perot_sum_numpy)

# sigma_y (x) sigma_y in the |ee>, |eg>, |ge>, |gg> basis.
SIGMA_YY = np.array([
    [0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
], dtype=np.complex128)


def _concurrence_batch_numpy(states):
    """Wootters concurrence for a stack of 4x4 states.

    The ``lambda_i`` are computed as singular values of ``tau = V^T (sy x sy) V``
    with ``rho = V V^+``, which equal the square roots of the eigenvalues of
    ``rho rho~`` but avoid the square-root amplification of roundoff near zero.
    Returns ``(values, max_imag, min_real)``: the largest imaginary part among
    the eigenvalues of ``rho rho~`` and the smallest real eigenvalue of either
    ``rho`` or ``rho rho~``, so the caller can decide whether the input was a
    valid state.
    """
    herm = 0.5 * (states + np.conj(np.swapaxes(states, -1, -2)))
    w, v = np.linalg.eigh(herm)
    flipped = SIGMA_YY @ np.conj(states) @ SIGMA_YY
    u = np.linalg.eigvals(states @ flipped)
    max_imag = float(np.max(np.abs(u.imag))) if u.size else 0.0
    min_real = float(min(np.min(u.real), np.min(w))) if u.size else 0.0
    vs = v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]
    tau = np.swapaxes(vs, -1, -2) @ SIGMA_YY @ vs
    lam = np.linalg.svd(tau, compute_uv=False)
    values = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    return np.clip(values, 0.0, 1.0), max_imag, min_real


def _concurrence_batch_loop(states):
    n = states.shape[0]
    values = np.zeros(n)
    max_imag = 0.0
    min_real = 0.0
    for i in range(n):
        rho = np.ascontiguousarray(states[i])
        herm = 0.5 * (rho + np.conj(rho.T))
        w, v = np.linalg.eigh(herm)
        flipped = np.dot(np.dot(SIGMA_YY, np.conj(rho)), SIGMA_YY)
        u = np.linalg.eigvals(np.dot(rho, flipped))
        for j in range(4):
            if abs(u[j].imag) > max_imag:
                max_imag = abs(u[j].imag)
            if u[j].real < min_real:
                min_real = u[j].real
            if w[j] < min_real:
                min_real = w[j]
        vs = np.empty((4, 4), dtype=np.complex128)
        for j in range(4):
            scale = np.sqrt(max(w[j], 0.0))
            for m in range(4):
                vs[m, j] = v[m, j] * scale
        tau = np.dot(np.dot(vs.T.copy(), SIGMA_YY), vs)
        lam = np.linalg.svd(tau)[1]
        c = lam[0] - lam[1] - lam[2] - lam[3]
        values[i] = min(max(c, 0.0), 1.0)
    return values, max_imag, min_real


_concurrence_batch_numba = njit(_concurrence_batch_loop)
concurrence_batch = select(_concurrence_batch_numba, _concurrence_batch_numpy)


def _transient_curve_numpy(decay, gamma_ab, g_ab, t):
    # exponent pairs kept separate so e^{+Gamma_ab t} never overflows
    plus = np.exp(-(decay + gamma_ab) * t)
    minus = np.exp(-(decay - gamma_ab) * t)
    damp = np.exp(-decay * t)
    return 0.5 * np.sqrt((plus - minus) ** 2 + 4.0 * (damp * np.sin(2.0 * g_ab * t)) ** 2)


def _transient_curve_loop(decay, gamma_ab, g_ab, t):
    out = np.empty(t.shape[0])
    for i in range(t.shape[0]):
        ti = t[i]
        plus = np.exp(-(decay + gamma_ab) * ti)
        minus = np.exp(-(decay - gamma_ab) * ti)
        damp = np.exp(-decay * ti) * np.sin(2.0 * g_ab * ti)
        out[i] = 0.5 * np.sqrt((plus - minus) ** 2 + 4.0 * damp * damp)
    return out


_transient_curve_numba = njit(_transient_curve_loop)
transient_curve = select(_transient_curve_numba, _transient_curve_numpy)
