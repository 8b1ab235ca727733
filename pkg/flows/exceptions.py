"""Errors raised by flow layers."""

from config.exceptions import GlowVCError


class FlowError(GlowVCError):
    """Base class for flow errors."""


class NotInitialized(FlowError):
    """An actnorm layer was inverted before its data-dependent init."""


class ConditionMissing(FlowError):
    """A speaker-conditioned layer was called without a condition."""


class ConditionUnexpected(FlowError):
    """An unconditioned layer was given a condition."""
