"""Exception hierarchy and warning types."""


class QeuclidError(Exception):
    """Base class for all library errors."""


class ConfigurationError(QeuclidError):
    """Bad or unknown configuration input (unknown family, unknown key)."""


class ShapeError(QeuclidError):
    """Mismatched grids, representations, or array shapes."""


class DomainError(QeuclidError):
    """Parameter outside its mathematical domain (p < 1, alpha outside (0,2), ...)."""


class NumericError(QeuclidError):
    """Non-finite values or failed matrix decompositions."""


class CalibrationError(QeuclidError):
    """Trace calibration could not be performed (trace below numeric floor)."""


class AccuracyError(QeuclidError):
    """Requested accuracy not reachable; carries the achieved bound."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class SectorError(DomainError):
    """Complex ray outside the admissible sector for the requested bound."""


class AssumptionError(DomainError):
    """A standing assumption of the estimate is violated (e.g. growth exponent too small)."""


class DivergenceError(QeuclidError):
    """Fixed-point iteration diverged; carries the ratio history."""

    def __init__(self, message, ratio_history=None):
        super().__init__(message)
        self.ratio_history = list(ratio_history or [])


class EmptyWindowError(QeuclidError):
    """No positive existence window could be computed."""


class LowConfidenceWarning(UserWarning):
    """Result returned but outside the grid's reliable band."""
