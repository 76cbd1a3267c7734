"""Exception hierarchy.

The CLI maps the three top-level families onto exit codes: validation (2),
consistency (3) and numerical (4).
"""


class PlasmonEntangleError(Exception):
    """Base class for all package errors."""


class ValidationError(PlasmonEntangleError, ValueError):
    """Invalid input: bad parameters, malformed files, unknown keys."""


class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class DomainError(ValidationError):
    """Evaluation point outside the domain of a provider."""


class ConfigurationError(ValidationError):
    """Inconsistent model configuration (e.g. overlapping scatterers)."""


class PositivityError(ValidationError):
    """Rate matrix that would not generate a completely positive evolution."""

    def __init__(self, message: str, **values: float):
        self.values = values
        detail = ", ".join(f"{k}={v:.6g}" for k, v in values.items())
        super().__init__(f"{message} ({detail})" if detail else message)


class ConsistencyError(PlasmonEntangleError):
    """Two independent computations of the same quantity disagree."""


class NumericalError(PlasmonEntangleError, ArithmeticError):
    """A numerical procedure failed or produced an untrustworthy result."""


class SingularityError(NumericalError):
    """Evaluation at a singular point of the free-space Green dyadic."""


class IntegrationError(NumericalError):
    """Step-size underflow or invariant drift during time integration."""


class SteadyStateError(NumericalError):
    """Steady state is not unique, or the kernel is numerically absent."""
