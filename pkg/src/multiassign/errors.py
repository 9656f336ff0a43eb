"""Exception types shared across the package."""


class MultiassignError(Exception):
    """Base class for all package errors."""


class ShapeError(MultiassignError, ValueError):
    """Operands have incompatible or invalid dimensions."""


class ValidationError(MultiassignError, ValueError):
    """An input violates a documented precondition (non-finite, out of range)."""


class CapacityError(MultiassignError, ValueError):
    """More ground truths than queries in a one-to-one matching problem."""


class ConfigError(MultiassignError, ValueError):
    """A configuration value or combination is unsupported."""


class VerificationError(MultiassignError, RuntimeError):
    """A numerical verification could not be carried out."""


class TrainingError(MultiassignError, RuntimeError):
    """Training hit a non-finite or divergent state."""


class GenerationError(MultiassignError, RuntimeError):
    """Synthetic scene generation could not satisfy its constraints."""
