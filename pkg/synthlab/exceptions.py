from config.exceptions import ConfigurationError, GlowVCError


class BadConfig(ConfigurationError):
    """A synthetic-corpus configuration is invalid."""


class InsufficientData(GlowVCError):
    """Not enough speakers or utterances to compute a metric."""


class LengthMismatch(GlowVCError):
    """Paired utterances differ in frame count."""
