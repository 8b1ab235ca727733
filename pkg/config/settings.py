"""
Django settings for the glowvc-desk project.

The project has no web surface: Django provides the settings layer and the
management-command CLI. Values that change between machines are read with
python-decouple from the environment or a ``.env`` file.
"""

from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='glowvc-desk-local-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS: list[str] = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    # Local apps
    'config',
    'storage',
    'features',
    'flows',
    'priors',
    'modeling',
    'training',
    'conversion',
    'synthlab',
]

# Nothing is persisted through the ORM; tensors go to GVCK containers.
DATABASES: dict = {}

USE_TZ = True

TIME_ZONE = 'UTC'


# Logging
# Diagnostics always go to standard error; machine output goes to files.

GLOWVC_LOG_LEVEL = config('GLOWVC_LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
            'stream': 'ext://sys.stderr',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': GLOWVC_LOG_LEVEL,
            'propagate': False,
        }
        for app in (
            'config',
            'storage',
            'features',
            'flows',
            'priors',
            'modeling',
            'training',
            'conversion',
            'synthlab',
        )
    },
}


# Runtime configuration

GLOWVC_NUM_THREADS = config('GLOWVC_NUM_THREADS', default=1, cast=int)
GLOWVC_DEFAULT_PRESET = config('GLOWVC_DEFAULT_PRESET', default='desk')
GLOWVC_CHECKPOINT_INTERVAL = config('GLOWVC_CHECKPOINT_INTERVAL', default=500, cast=int)
GLOWVC_LOG_INTERVAL = config('GLOWVC_LOG_INTERVAL', default=50, cast=int)

# Checkpoint / feature container format
GLOWVC_CONTAINER_MAGIC = b'GVCK'
GLOWVC_CONTAINER_VERSION = 1
