"""Desk-scale detection decoder with diverse one-to-many auxiliary supervision.

A transformer-style decoder detector trained end to end with one-to-one
matching on its primary branch and, during training only, extra low-rank
adapter branches supervised by diverse one-to-many assignment strategies.
The adapters share the base feed-forward weights, inject dense gradients
into them, and strip away at inference with bit-identical primary outputs.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConfigError,
    GenerationError,
    MultiassignError,
    ShapeError,
    TrainingError,
    ValidationError,
    VerificationError,
)

__all__ = [
    "CapacityError",
    "ConfigError",
    "GenerationError",
    "MultiassignError",
    "ShapeError",
    "TrainingError",
    "ValidationError",
    "VerificationError",
    "__version__",
]
