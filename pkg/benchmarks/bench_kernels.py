"""Time the numba kernels against their pure-numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is called once
before timing so numba compilation is excluded.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from plasmon_entangle import _accel, kernels
from plasmon_entangle.dynamics import build_liouvillian, projector, vec
from plasmon_entangle.rates import RateMatrix


def cases(rng):
    lmat = np.ascontiguousarray(build_liouvillian(RateMatrix.symmetric(1.0, -0.5, 0.5), (0.1, 0.1)).matrix)
    y0 = vec(projector("eg")).copy()
    t = np.linspace(0.0, 20.0, 401)
    k = complex(2 * np.pi / 425e-9, 0.5 / 1.7e-6)
    m = rng.normal(size=(2000, 4, 4)) + 1j * rng.normal(size=(2000, 4, 4))
    states = m @ m.conj().transpose(0, 2, 1)
    states = np.ascontiguousarray(states / np.trace(states, axis1=1, axis2=2)[:, None, None])
    tt = np.linspace(0.0, 20.0, 100_000)
    return {
        "dopri5_linear": ("_dopri5_linear", (lmat, y0, t, 1e-9, 1e-12, 1_000_000)),
        "fabry_perot_sum": ("_fabry_perot_sum", (k, 0.9j, 5e-6, 1e-7, 4e-6, 1e-12, 100_000)),
        "concurrence_batch": ("_concurrence_batch", (states,)),
        "transient_curve": ("_transient_curve", (1.0, -0.4, 0.3, tt)),
    }


def best_time(fn, args, repeat):
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, (stem, call_args) in cases(rng).items():
        t_np = best_time(getattr(kernels, stem + "_numpy"), call_args, args.repeat)
        t_nb = best_time(getattr(kernels, stem + "_numba"), call_args, args.repeat)
        print(f"{name:<20}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
