"""Shared exception types."""


class DomainError(ValueError):
    """The sheet leaves the embedded regime (1 + 2*eta below the floor)."""


class BlowUpError(RuntimeError):
    """Amplitude guard tripped during time stepping."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DegenerateFrequencyError(ValueError):
    """A linear frequency needed by the complex coordinate change is (near) zero."""


class ConfigError(ValueError):
    """Invalid run configuration; `field` names the offending entry when known."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
