"""Numba toggle for the hot kernels.

Set ``PLASMON_ENTANGLE_DISABLE_NUMBA=1`` to force the pure-numpy path, e.g. for
debugging or on platforms without numba.
"""

from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

ENV_FLAG = "PLASMON_ENTANGLE_DISABLE_NUMBA"

HAVE_NUMBA = numba is not None
NUMBA_DISABLED = os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def njit(fn):
    """Compile ``fn`` in nopython mode when numba is importable, else return it unchanged.

    Compilation happens whether or not the env flag is set, so both paths stay
    available for benchmarks and equivalence tests; the flag only changes
    which one :func:`select` hands out.
    """
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def select(jitted, fallback):
    return jitted if USE_NUMBA else fallback
