"""
Base settings to build other settings files upon.
"""
import environ

ROOT_DIR = (
    environ.Path(__file__) - 3
)  # (stochflow/config/settings/base.py - 3 = stochflow/)
APPS_DIR = ROOT_DIR.path("stochflow")

env = environ.Env()

READ_DOT_ENV_FILE = env.bool("DJANGO_READ_DOT_ENV_FILE", default=False)
if READ_DOT_ENV_FILE:
    # OS environment variables take precedence over variables from .env
    env.read_env(str(ROOT_DIR.path(".env")))

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = env.bool("DJANGO_DEBUG", False)
# https://docs.djangoproject.com/en/dev/ref/settings/#time-zone
TIME_ZONE = "UTC"
# https://docs.djangoproject.com/en/dev/ref/settings/#language-code
LANGUAGE_CODE = "en-us"
# https://docs.djangoproject.com/en/dev/ref/settings/#use-i18n
USE_I18N = False
# https://docs.djangoproject.com/en/dev/ref/settings/#use-tz
USE_TZ = True

# DATABASES
# ------------------------------------------------------------------------------
# Runs write files only; nothing is stored in a database.
# https://docs.djangoproject.com/en/dev/ref/settings/#databases
DATABASES = {}

# APPS
# ------------------------------------------------------------------------------
DJANGO_APPS = [
    "django.contrib.contenttypes",
]
THIRD_PARTY_APPS = [
    "rest_framework",
]

LOCAL_APPS = [
    "stochflow.core",
    "stochflow.sde",
    "stochflow.fields",
    "stochflow.reference",
    "stochflow.transport",
    "stochflow.recovery",
    "stochflow.navierstokes",
    "stochflow.dynamo",
    "stochflow.driftless",
    "stochflow.scenarios",
]
# https://docs.djangoproject.com/en/dev/ref/settings/#installed-apps
INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

# STOCHFLOW
# ------------------------------------------------------------------------------
# Worker threads for path blocks. Results do not depend on it.
SDE_WORKERS = env.int("STOCHFLOW_WORKERS", default=1)
# Where `manage.py scenario run` writes when no --output-dir is given.
STOCHFLOW_OUTPUT_ROOT = env("STOCHFLOW_OUTPUT_ROOT",
                            default=str(ROOT_DIR.path("runs")))
STOCHFLOW_LOG_LEVEL = env("STOCHFLOW_LOG_LEVEL", default="INFO")

# LOGGING
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#logging
# See https://docs.djangoproject.com/en/dev/topics/logging for
# more details on how to customize your logging configuration.
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(levelname)s %(asctime)s %(module)s "
            "%(process)d %(thread)d %(message)s"
        }
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        }
    },
    "root": {"level": STOCHFLOW_LOG_LEVEL, "handlers": ["console"]},
    "loggers": {
        "stochflow": {
            "level": STOCHFLOW_LOG_LEVEL,
            "handlers": ["console"],
            "propagate": False,
        },
        "matplotlib": {"level": "WARNING"},
    },
}

try:
    from stochflow.utils.conf import set_dynamic_settings
except ImportError:
    pass
else:
    set_dynamic_settings(globals())
