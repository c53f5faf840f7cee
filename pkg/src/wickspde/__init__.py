"""Wick-renormalised stochastic PDEs on the 2-D torus: simulation and Monte Carlo checks."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BranchTrackingError,
    CapacityError,
    ConfigurationError,
    DivergenceError,
    IntegrityError,
    NumericError,
    PreconditionError,
    WickSPDEError,
)
from .field import FourierField, ModeIndex  # noqa: F401
