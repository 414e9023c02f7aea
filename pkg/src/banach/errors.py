"""Exception taxonomy shared across the package.

Four failure classes are distinguished so callers can react precisely:
malformed body descriptions, out-of-domain arguments, operations a body
kind does not support, and inputs that are degenerate for an otherwise
valid operation (rank-deficient point sets, all-identical point clouds).
"""


class BanachError(Exception):
    """Base class for all package errors."""


class InvalidBodyError(BanachError):
    """Body description is malformed (bad kind, shape mismatch, bad field)."""


class DomainError(BanachError):
    """Argument outside the documented domain (NaN, negative scale, bad p)."""


class UnsupportedOperationError(BanachError):
    """Operation is well-posed but not available for this body kind."""


class DegenerateInputError(BanachError):
    """Input is too degenerate to carry out the operation."""


class ConfigError(BanachError):
    """Experiment configuration failed validation."""
