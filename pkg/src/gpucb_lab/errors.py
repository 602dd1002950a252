"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all errors raised by gpucb_lab."""


class InputError(LabError, ValueError):
    """Malformed or out-of-range input (non-finite coordinates, empty sets, ...)."""


class ConfigError(LabError, ValueError):
    """Invalid configuration value or combination of values."""


class DomainError(LabError, ValueError):
    """A closed-form bound was evaluated outside the hypotheses it needs."""


class NumericError(LabError, ArithmeticError):
    """Factorization or quadrature failure."""


class SchemaError(LabError, ValueError):
    """A run table does not match the expected CSV layout."""
