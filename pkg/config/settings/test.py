"""
With these settings, tests run faster and quieter.
"""
import os
import tempfile

from .base import *  # noqa
from .base import env

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = False
# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="tm4!x0c^8q7e$2w@r6b%z1n&k9s(j3f)h5v*y-d+l_u=p#g",
)

# STOCHFLOW
# ------------------------------------------------------------------------------
SDE_WORKERS = 1
STOCHFLOW_OUTPUT_ROOT = os.path.join(tempfile.gettempdir(),
                                     "stochflow-test-runs")

# LOGGING
# ------------------------------------------------------------------------------
LOGGING["root"]["level"] = "WARNING"  # noqa F405
LOGGING["loggers"]["stochflow"]["level"] = "WARNING"  # noqa F405
