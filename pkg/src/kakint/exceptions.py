"""Exception types shared across the package."""


class KakintError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(KakintError, ValueError):
    """Unsupported family/size combination or invalid run configuration."""


class DomainError(KakintError, ValueError):
    """Input matrix is not a member of the expected group or algebra."""


class DegeneracyError(KakintError, RuntimeError):
    """Eigenvalue clustering could not separate restricted roots.

    Carries a ``diagnostics`` dict with the offending cluster data.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SingularityError(KakintError, ValueError):
    """Operation requires a regular element but got a singular one."""


class CalibrationError(KakintError, RuntimeError):
    """Calibration constant could not be determined (reduced side ~ 0)."""


class RangeError(KakintError, ValueError):
    """Numeric overflow/non-finite value at an extreme chart coordinate."""


class InternalError(KakintError, RuntimeError):
    """Invariant violated inside the library (indicates a bug)."""
