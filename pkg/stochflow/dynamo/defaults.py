"""
Default settings for the ``stochflow.dynamo`` app. Each of these can be
overridden in your project's settings module, just like regular
Django settings.
"""
from stochflow.conf import register_setting


register_setting(
    name="DYNAMO_BOOTSTRAP_RESAMPLES",
    description="Path resamples used for the growth-rate confidence "
                "interval.",
    default=200,
)

register_setting(
    name="DYNAMO_CONFIDENCE",
    description="Coverage of the growth-rate confidence interval.",
    default=0.95,
)

register_setting(
    name="DYNAMO_DIVERGENCE_TOLERANCE",
    description="Largest divergence of the initial magnetic field, relative "
                "to its largest gradient, accepted at the sampling points.",
    default=1e-6,
)
