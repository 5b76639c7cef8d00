"""Shared exception types."""


class DimensionMismatch(ValueError):
    """Operands live in different phase-space dimensions."""


class NonZeroAverage(ValueError):
    """Right-hand side of a homological equation has a (0,0) mode."""


class ExactResonance(ArithmeticError):
    """A small divisor omega(y).k + m vanishes identically."""


class PoleInsideDomain(ArithmeticError):
    """A coefficient denominator has a root inside the norm domain."""


class PoleEncountered(ArithmeticError):
    """Numerical integration ran into a coefficient pole."""


class ResonantDomain(ArithmeticError):
    """The non-resonance constant vanishes on the requested domain."""


class PotentialMismatch(RuntimeError):
    """The conservative step failed its Hamiltonian cross-check."""


class ProblemParseError(ValueError):
    """A problem file or series literal failed to parse."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}" + (f", column {column}" if column is not None else "") + f": {message}"
        super().__init__(message)
