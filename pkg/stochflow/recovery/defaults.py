"""
Default settings for the ``stochflow.recovery`` app. Each of these can be
overridden in your project's settings module, just like regular
Django settings.
"""
from stochflow.conf import register_setting


register_setting(
    name="RECOVERY_S_NODES",
    description="Number of geometric nodes in the diffusion-time "
                "quadrature used to recover velocity from vorticity.",
    default=40,
)

register_setting(
    name="RECOVERY_S_MIN_FACTOR",
    description="Smallest quadrature node as a multiple of the squared "
                "vorticity length scale.",
    default=1e-3,
)

register_setting(
    name="RECOVERY_S_MAX_FACTOR",
    description="Largest free-space quadrature node as a multiple of the "
                "squared vorticity length scale. On the torus the largest "
                "node is the squared period.",
    default=1e4,
)

register_setting(
    name="RECOVERY_TAIL_TOLERANCE",
    description="Truncated quadrature tail, relative to the recovered "
                "speed, above which a QuadratureWarning is emitted.",
    default=1e-3,
)

register_setting(
    name="RECOVERY_FD_STEP_FACTOR",
    description="Finite-difference step of the gradient-form estimator as "
                "a multiple of the vorticity length scale.",
    default=1e-3,
)

register_setting(
    name="RECOVERY_RADIAL_NODES",
    description="Gauss-Legendre nodes along the radius of the free-space "
                "Biot-Savart quadrature around each target.",
    default=160,
)

register_setting(
    name="RECOVERY_ANGULAR_NODES",
    description="Trapezoid nodes in angle of the free-space Biot-Savart "
                "quadrature around each target. 3D uses half as many "
                "Gauss-Legendre nodes in the polar direction.",
    default=128,
)

register_setting(
    name="RECOVERY_SPECTRAL_SHAPE",
    description="Nodes per axis when vorticity is sampled for the periodic "
                "spectral Biot-Savart route.",
    default=64,
)
