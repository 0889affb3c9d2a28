"""Exception hierarchy shared by all modules."""


class HydrogaugeError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(HydrogaugeError, ValueError):
    """Invalid parameters, schema violations, unsupported gauges."""


class DomainError(HydrogaugeError, ValueError):
    """Arguments outside the mathematical domain (n < 1, l >= n, e >= 1, ...)."""


class PreconditionError(HydrogaugeError):
    """A method was asked to run where its derivation does not hold."""


class AccuracyError(HydrogaugeError, RuntimeError):
    """A numerical self-check (step halving, close approach) failed."""
