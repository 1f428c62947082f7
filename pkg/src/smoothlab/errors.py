"""Exception types shared across the package."""


class SmoothlabError(Exception):
    """Base class for all package errors."""


class UsageError(SmoothlabError, ValueError):
    """Bad arguments, wrong field tags, or a violated theorem hypothesis.

    ``hypothesis`` carries the text of the violated hypothesis, when the
    error comes from a hypothesis gate.
    """

    def __init__(self, message, hypothesis=None):
        super().__init__(message)
        self.hypothesis = hypothesis


class DomainError(SmoothlabError, ValueError):
    """A point outside the domain of an operation (e.g. a gradient at 0)."""


class NumericError(SmoothlabError, ArithmeticError):
    """Non-finite values where finite ones are required."""


class ConfigError(SmoothlabError, ValueError):
    """Unparseable or inconsistent harness configuration."""


def require(condition, hypothesis, context=""):
    """Raise :class:`UsageError` naming ``hypothesis`` unless ``condition``."""
    if not condition:
        msg = f"requires {hypothesis}"
        if context:
            msg = f"{context}: {msg}"
        raise UsageError(msg, hypothesis=hypothesis)
