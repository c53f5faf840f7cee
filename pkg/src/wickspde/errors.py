"""Exception hierarchy shared by all modules."""


class WickSPDEError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(WickSPDEError, ValueError):
    """Invalid or inconsistent configuration (grid sizes, cutoffs, config files)."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class PreconditionError(WickSPDEError, ValueError):
    pass


class CapacityError(WickSPDEError):
    """A request exceeds the exact-arithmetic or enumeration budget."""


class NumericError(WickSPDEError, ArithmeticError):
    pass


class BranchTrackingError(WickSPDEError):
    def __init__(self, message, t):
        super().__init__(f"{message} (t={t:.6g})")
        self.t = t


class DivergenceError(WickSPDEError):
    def __init__(self, message, t):
        super().__init__(f"{message} (t={t:.6g})")
        self.t = t


class IntegrityError(WickSPDEError):
    """Checksum mismatch between a manifest and the files it lists."""
