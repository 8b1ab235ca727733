"""Base class of every GlowVC management command."""

import logging

import torch
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from config.exceptions import GlowVCError

logger = logging.getLogger(__name__)

RUNTIME_FAILURE = 1
BAD_USAGE = 2


class GlowVCCommand(BaseCommand):
    """
    Runs single-threaded (unless configured otherwise) and turns domain and
    I/O errors into ``CommandError`` with exit status 1.
    """

    requires_system_checks = []

    def execute(self, *args, **options):
        torch.set_num_threads(settings.GLOWVC_NUM_THREADS)
        try:
            return super().execute(*args, **options)
        except CommandError:
            raise
        except (GlowVCError, OSError, KeyError) as exc:
            logger.debug('command failed', exc_info=True)
            raise CommandError(str(exc), returncode=RUNTIME_FAILURE) from exc

    @staticmethod
    def usage_error(message: str) -> CommandError:
        return CommandError(message, returncode=BAD_USAGE)

    @staticmethod
    def runtime_error(message: str) -> CommandError:
        return CommandError(message, returncode=RUNTIME_FAILURE)
