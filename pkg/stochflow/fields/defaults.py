"""
Default settings for the ``stochflow.fields`` app. Each of these can be
overridden in your project's settings module, just like regular
Django settings.
"""
from stochflow.conf import register_setting


register_setting(
    name="FIELDS_INTERPOLATION_ORDER",
    description="B-spline order used to interpolate grid fields. Cubic "
                "keeps gradients continuous.",
    default=3,
    choices=(1, 3, 5),
)
