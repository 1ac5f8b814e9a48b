"""Exception taxonomy shared by all modules."""


class GraphWhittleError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(GraphWhittleError, ValueError):
    """Bad sizes, vertices outside the graph, malformed subsets, theta outside its domain."""


class SingularDensityError(GraphWhittleError, ValueError):
    """Spectral density vanishes or changes sign where it must be positive."""


class NotPositiveDefiniteError(GraphWhittleError, ArithmeticError):
    """Covariance factorization failed even after the jitter ladder."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class AssumptionViolationError(GraphWhittleError, RuntimeError):
    """A local-measure class has no representative pair inside the observation window."""


class EstimationFailedError(GraphWhittleError, RuntimeError):
    """Every likelihood evaluation on the search grid failed."""


class NumericalError(GraphWhittleError, RuntimeError):
    """Eigensolver or quadrature failure with diagnostics in the message."""


class DegenerateInformationError(GraphWhittleError, RuntimeError):
    """Fisher information vanished; no standard error or interval exists."""


class ConfigError(GraphWhittleError, ValueError):
    """Invalid or unknown configuration keys, or unreadable config files."""
