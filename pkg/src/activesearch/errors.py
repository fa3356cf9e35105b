"""Exception and warning types shared across the package."""


class ActiveSearchError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ActiveSearchError):
    """A data file could not be parsed; message names the offending line/cell."""


class ShapeError(ActiveSearchError):
    """Array dimensions do not match what an operation requires."""


class ParameterError(ActiveSearchError):
    """A hyperparameter or option is outside its valid range."""


class ZeroDegreeError(ActiveSearchError):
    """A point has zero similarity mass; the propagation formulas divide by it."""

    def __init__(self, index):
        self.index = index
        super().__init__(
            f"point {index} has zero degree; filter zero-norm points before running"
        )


class GraphCapError(ActiveSearchError):
    """The dense reference engine refuses instances over its size cap."""


class NumericalError(ActiveSearchError):
    """A factorization failed or a system is numerically unusable."""


class SingularUpdateError(ActiveSearchError):
    """The rank-one inverse update denominator vanished; state left unchanged."""


class SingularImpactError(ActiveSearchError):
    """The impact-factor point correction is singular for some candidate."""

    def __init__(self, index):
        self.index = index
        super().__init__(f"impact correction denominator vanished at point {index}")


class StateError(ActiveSearchError):
    """An operation was applied to a point in the wrong labeled/unlabeled set."""


class SessionExhaustedError(ActiveSearchError):
    """No unlabeled points remain (or the label budget is spent)."""


class ConfigError(ActiveSearchError):
    """An experiment or service configuration is invalid."""


class NumericalWarning(UserWarning):
    """Result is returned but a conditioning or residual check tripped."""


class DataWarning(UserWarning):
    """Data-hygiene notice (zero-norm points, duplicate bias rows, ...)."""
