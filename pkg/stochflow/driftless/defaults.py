"""
Default settings for the ``stochflow.driftless`` app. Each of these can
be overridden in your project's settings module, just like regular
Django settings.
"""
from stochflow.conf import register_setting


register_setting(
    name="DRIFTLESS_FRAME_TOLERANCE",
    description="Largest isotropy and drift residual of a frame that "
                "passes verification; the drift residual is taken "
                "relative to the drift size when that exceeds one.",
    default=1e-4,
)

register_setting(
    name="DRIFTLESS_DIVERGENCE_TOLERANCE",
    description="Largest divergence, relative to the largest velocity "
                "gradient, of a drift that a rotation frame may encode.",
    default=1e-8,
)

register_setting(
    name="DRIFTLESS_MAX_ORDER",
    description="Highest total order of the endpoint moments compared "
                "between a frame run and a drifted run.",
    default=4,
)

register_setting(
    name="DRIFTLESS_Z_THRESHOLD",
    description="Largest |z| of a moment difference that still counts as "
                "agreement in law.",
    default=4.0,
)

register_setting(
    name="DRIFTLESS_PROBES",
    description="Random points used to verify a frame over its domain.",
    default=100,
)
