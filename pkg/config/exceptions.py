"""
Exception hierarchy shared by every app of the project.

App-specific errors live in each app's ``exceptions`` module and derive
from ``GlowVCError`` so the CLI can map them to a single exit status.
"""


class GlowVCError(Exception):
    """Base class for every domain error raised by the project."""


class ConfigurationError(GlowVCError):
    """A run configuration or preset is invalid."""


class ShapeMismatch(GlowVCError):
    """Two tensors that must agree in shape do not."""


class WrongVariant(GlowVCError):
    """An operation was called on a model of the other variant."""


class ModelNotFrozen(GlowVCError):
    """An inference entry point received a model still in training mode."""
