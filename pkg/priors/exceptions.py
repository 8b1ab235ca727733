"""Errors raised while building prior statistics."""

from config.exceptions import GlowVCError


class PriorError(GlowVCError):
    """Base class for prior errors."""


class EmptyInput(PriorError):
    """An utterance has no phonemes."""


class NonPositiveDuration(PriorError):
    """A phoneme was given a duration below one frame."""


class VocabularyOverflow(PriorError):
    """A phoneme or language id is outside the encoder's vocabulary."""
