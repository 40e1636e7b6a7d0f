from .base import *  # noqa
from .base import env

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = True
# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="q2v#9z&h1m!c7x$k4p@t0b^w6n*e8r(s3j)f5y-g+l_u=d",
)

# LOGGING
# ------------------------------------------------------------------------------
# Per-step solver diagnostics are logged at DEBUG.
LOGGING["loggers"]["stochflow"]["level"] = env(  # noqa F405
    "STOCHFLOW_LOG_LEVEL", default="DEBUG")
