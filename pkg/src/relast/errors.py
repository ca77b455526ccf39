"""Exception hierarchy.

Every failure mode raised by the library derives from :class:`RelastError`
so callers (and the command line driver) can separate numerical failures
from input errors.
"""


class RelastError(Exception):
    """Base class for all library errors."""


class InputError(RelastError):
    """Malformed or out-of-range user input (config, mesh file, arguments)."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)


class DimensionError(RelastError, ValueError):
    pass


class VarianceError(RelastError, ValueError):
    """Contraction or index operation applied to slots of the wrong kind."""


class MetricDegenerateError(RelastError, ValueError):
    """Metric not positive definite (Cholesky failed or determinant <= 0)."""


class ImmersionError(RelastError, ValueError):
    """Singular deformation Jacobian."""


class ChartExitError(RelastError):
    """Geodesic left the admissible region of the chart."""


class DivergenceError(RelastError):
    """Non-finite state during an integration."""


class CapabilityError(RelastError):
    """Requested quantity needs data the model does not provide."""


class DisplacementTooLargeError(RelastError):
    """Pushed-forward displacement exceeds the admissible exponential-map ball."""

    def __init__(self, node, value, bound):
        self.node = node
        self.value = value
        self.bound = bound
        super().__init__(
            f"node {node}: |D phi0 . xi| = {value!r} exceeds admissible bound {bound!r}"
        )


class DegenerateFacetError(RelastError, ValueError):
    pass


class NonConvergenceError(RelastError):
    """Iterative solver hit its iteration limit."""

    def __init__(self, message, history=None):
        self.history = list(history) if history is not None else []
        super().__init__(message)


class NotPositiveDefiniteError(RelastError):
    """Conjugate gradients met a direction with p^T K p <= 0."""


class EigenStagnationError(NonConvergenceError):
    pass


class ContractionFailureError(RelastError):
    """Chord iteration failed to contract (load too large)."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
