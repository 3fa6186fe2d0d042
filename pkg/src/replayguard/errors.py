class ReplayGuardError(Exception):
    """Base class for every error raised by this package."""


class FormatError(ReplayGuardError, ValueError):
    """A packet does not satisfy its wire-format invariants."""


class UnsupportedFormatError(FormatError):
    """The packet format lacks a field the chosen detector needs."""


class ConfigError(ReplayGuardError, ValueError):
    """Invalid detector, filter or simulation parameters."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
