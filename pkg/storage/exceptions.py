"""Errors raised while reading or writing GVCK containers."""

from config.exceptions import GlowVCError


class ContainerError(GlowVCError):
    """Base class for container errors."""


class BadMagic(ContainerError):
    """The file does not start with the GVCK magic."""


class VersionUnsupported(ContainerError):
    """The container version is newer or older than this reader supports."""


class CorruptIndex(ContainerError):
    """The header is unreadable or indexes bytes outside the payload."""
