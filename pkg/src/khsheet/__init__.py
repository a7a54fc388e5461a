"""Pseudo-spectral laboratory for near-circular vortex-sheet contour dynamics."""

__version__ = "0.1.0"

from .errors import BlowUpError, ConfigError, DegenerateFrequencyError, DomainError
from .spectral import Field, FourierGrid, make_grid
from .state import PhysParams, SheetState

__all__ = [
    "BlowUpError",
    "ConfigError",
    "DegenerateFrequencyError",
    "DomainError",
    "Field",
    "FourierGrid",
    "PhysParams",
    "SheetState",
    "make_grid",
    "__version__",
]
