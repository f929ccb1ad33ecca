"""
Django settings for brandt_service project.

The project has no web surface: it hosts the ``brandt`` app, whose management
commands are the command-line interface, and whose library modules compute
Brandt matrices, theta series and Jacquet-Langlands checks.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Nothing is signed or served; Django still insists on a key.
SECRET_KEY = config('SECRET_KEY', default='brandt-local-development-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third-party apps
    'rest_framework',

    # Local apps
    'brandt',
]

# No models: the test suite runs on SimpleTestCase only.
DATABASES = {}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# REST Framework settings (serializers only, no views)
REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_RENDERER_CLASSES': ['rest_framework.renderers.JSONRenderer'],
}


# Computation settings
BRANDT_NODE_BUDGET = config('BRANDT_NODE_BUDGET', default=5000, cast=int)
BRANDT_SAFETY_SWEEP = config('BRANDT_SAFETY_SWEEP', default=True, cast=bool)
BRANDT_JOBS = config('BRANDT_JOBS', default=1, cast=int)
BRANDT_FIXTURES = config(
    'BRANDT_FIXTURES',
    default=str(BASE_DIR / 'brandt' / 'fixtures' / 'newforms.jsonl'),
)
BRANDT_TRACE_BOUND = config('BRANDT_TRACE_BOUND', default=50, cast=int)

# Enables the level p^3 computations that take minutes
BRANDT_SLOW_TESTS = config('BRANDT_SLOW_TESTS', default=False, cast=bool)


# Redis cache for computed class sets; empty means Django's cache only
REDIS_URL = config('REDIS_URL', default='')
BRANDT_CACHE_TIMEOUT = config('BRANDT_CACHE_TIMEOUT', default=86400, cast=int)

CACHES = {
    'default': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'brandt-classsets',
    }
}


# Logging goes to stderr so that command output on stdout stays byte-identical
LOG_LEVEL = config('LOG_LEVEL', default='WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'brandt': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
