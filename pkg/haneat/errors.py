"""Error types shared across the package.

Every failure surfaces as a ``RuntimeError`` subclass with a message that
names the offending object; the CLI turns ``exit_code`` into the process
status.
"""


class HaneatError(RuntimeError):
    """Base class for all errors raised by haneat."""

    exit_code = 3


class UsageError(HaneatError):
    """Caller passed arguments that cannot be used (wrong dimensions, empty data)."""

    exit_code = 1


class ConfigError(UsageError):
    """Configuration value outside its allowed range or unknown config key."""


class DataError(HaneatError):
    """Dataset file missing, malformed or empty."""

    exit_code = 2


class StructureError(HaneatError):
    """A genome broke a structural invariant (cycle, dangling endpoint, ...)."""


class NumericError(HaneatError):
    """A non-finite value reached an activation function."""
