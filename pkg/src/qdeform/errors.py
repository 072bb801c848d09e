"""Exception hierarchy shared by all modules."""


class QDeformError(Exception):
    """Base class for every error raised by this package."""


class SymbolError(QDeformError, KeyError):
    """An expression refers to a symbol that is not bound or not in the chart."""

    def __init__(self, symbol, message=None):
        self.symbol = symbol
        super().__init__(message or f"unknown symbol {symbol!r}")

    def __str__(self):
        return self.args[0]


class ParameterError(QDeformError, ValueError):
    """A model parameter is outside its admissible range."""


class DomainError(QDeformError, ValueError):
    """A point lies outside the domain of a map or special function."""


class SingularityError(DomainError):
    """Evaluation hit a singular metric or bivector."""


class DegeneracyError(QDeformError, ValueError):
    """A matrix that must be invertible is (numerically) singular."""


class QuadratureError(QDeformError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class IntegrationError(QDeformError, RuntimeError):
    """The ODE solver gave up; ``last_time``/``last_state`` hold the last good sample."""

    def __init__(self, message, last_time=None, last_state=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state


class SizeError(QDeformError, ValueError):
    """Operator dimensions are inconsistent or too small."""


class ConstructionError(QDeformError, RuntimeError):
    """A constructed representation failed its own residual checks."""


class ParseError(QDeformError, ValueError):
    """Syntax error in an expression, with 1-based line/column."""

    def __init__(self, message, line=1, column=1):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")
