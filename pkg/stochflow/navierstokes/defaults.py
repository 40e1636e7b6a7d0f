"""
Default settings for the ``stochflow.navierstokes`` app. Each of these
can be overridden in your project's settings module, just like regular
Django settings.
"""
from stochflow.conf import register_setting


register_setting(
    name="NS_PICARD_ITERATIONS",
    description="Transport passes per step. One pass freezes the velocity "
                "at the start of the step; more passes re-transport with "
                "the velocity blended towards the end of the step.",
    default=1,
)

register_setting(
    name="NS_PICARD_MAX_ITERATIONS",
    description="Upper bound on transport passes per step.",
    default=5,
)

register_setting(
    name="NS_PICARD_TOLERANCE",
    description="Relative sup-norm change of the end-of-step velocity "
                "below which the Picard passes stop.",
    default=1e-3,
)

register_setting(
    name="NS_RESOLUTION_TOLERANCE",
    description="Share of the squared vorticity in the outer third of the "
                "grid wavenumbers above which a ResolutionWarning is "
                "emitted.",
    default=0.02,
)
