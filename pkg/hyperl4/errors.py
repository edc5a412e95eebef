"""
Exception hierarchy for hyperl4.

Every error raised on purpose by the library derives from Hyperl4Error and
carries a human-readable ``message``. The CLI maps the classes to exit codes
(see hyperl4.main).
"""

from typing import Any


class Hyperl4Error(Exception):
    """Base class for all hyperl4 errors."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)


class BoundError(Hyperl4Error, ValueError):
    """A coordinate or parameter is outside its supported range."""


class ContainmentError(Hyperl4Error, ValueError):
    """A support is not contained in the plane/line family it was declared on."""


class StabilityError(Hyperl4Error, ValueError):
    """Integrator step size or grid violates the stability/dealiasing budget."""


class BudgetExceededError(Hyperl4Error):
    """The work estimate of a kernel exceeds the configured budget."""

    def __init__(self, message: str, stats: dict[str, Any] | None = None):
        self.stats = dict(stats or {})
        if self.stats:
            details = ", ".join(f"{k}={v}" for k, v in self.stats.items())
            message = f"{message} ({details})"
        super().__init__(message)


class PointSetParseError(Hyperl4Error):
    """A CSV input file could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int = 0):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if path else f"line {line}: "
        super().__init__(f"{where}{message}" if line else message)


class ConfigError(Hyperl4Error):
    """Invalid suite configuration or golden file."""
