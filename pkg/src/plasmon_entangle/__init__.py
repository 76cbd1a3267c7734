"""Entanglement of two quantum emitters coupled through plasmonic waveguides.

Modules:

- ``greens``: projected Green values from free space, 1D guide models and tabulated data
- ``rates``: decay and coupling rates ``Gamma_ij``, ``g_ij``
- ``dynamics``: Liouvillian, time evolution and steady states
- ``entanglement``: Wootters concurrence and the closed-form transient
- ``fileio`` / ``cli``: scenario files, result files and the command line
"""

from .dynamics import (
    Liouvillian,
    PumpConfig,
    Trajectory,
    analytic_transient,
    build_liouvillian,
    evolve,
    steady_state,
)
from .entanglement import concurrence_general, concurrence_series, peak_concurrence, transient_concurrence
from .errors import (
    ConsistencyError,
    NumericalError,
    ParseError,
    PlasmonEntangleError,
    PositivityError,
    ValidationError,
)
from .greens import (
    FabryPerotModel,
    FiniteGuide,
    FreeSpace,
    InfiniteGuide,
    Plasmon1DModel,
    SlotScatterer,
    SlottedGuide,
    Tabulated,
    TabulatedGreenSet,
)
from .rates import QubitPair, RateMatrix, compute_rates, normalized_rates

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError", "FabryPerotModel", "FiniteGuide", "FreeSpace", "InfiniteGuide", "Liouvillian",
    "NumericalError", "ParseError", "Plasmon1DModel", "PlasmonEntangleError", "PositivityError", "PumpConfig",
    "QubitPair", "RateMatrix", "SlotScatterer", "SlottedGuide", "Tabulated", "TabulatedGreenSet", "Trajectory",
    "ValidationError", "analytic_transient", "build_liouvillian", "compute_rates", "concurrence_general",
    "concurrence_series", "evolve", "normalized_rates", "peak_concurrence", "steady_state",
    "transient_concurrence",
]
