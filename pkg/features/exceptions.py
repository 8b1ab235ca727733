"""Errors raised while reading audio and extracting features."""

from config.exceptions import GlowVCError


class FeatureError(GlowVCError):
    """Base class for feature-extraction errors."""


class MalformedRiff(FeatureError):
    """The file is not a readable RIFF/WAVE container."""


class UnsupportedFormat(FeatureError):
    """The container is valid but not 16-bit PCM mono at 16 kHz."""


class TooShort(FeatureError):
    """The waveform is shorter than one analysis window."""
