"""
Default settings for the ``stochflow.sde`` app. Each of these can be
overridden in your project's settings module, just like regular
Django settings.
"""
from stochflow.conf import register_setting


register_setting(
    name="SDE_INVALID_PATH_THRESHOLD",
    description="Largest fraction of paths that may be flagged invalid "
                "(non-finite drift or Jacobian overflow) before a run fails.",
    default=0.01,
)

register_setting(
    name="SDE_JACOBIAN_OVERFLOW",
    description="Jacobian matrix norm above which a path is flagged invalid.",
    default=1e12,
)

register_setting(
    name="SDE_PATHS_PER_STREAM",
    description="Number of consecutive paths that draw their increments "
                "from one counter-based stream block. Part of the "
                "reproducibility contract: changing it changes results.",
    default=1024,
)

register_setting(
    name="SDE_RNG_ALGORITHM",
    description="Identifier of the counter-based generator recorded in "
                "every output.",
    default="philox4x64-10",
    choices=("philox4x64-10",),
)

register_setting(
    name="SDE_DEFAULT_DT",
    description="Target time step for path integration when a query does "
                "not give one.",
    default=0.01,
)

register_setting(
    name="SDE_WORKERS",
    description="Worker threads used to integrate path blocks. Affects "
                "speed only.",
    default=1,
)

register_setting(
    name="SDE_MAX_PATHS_PER_BATCH",
    description="Largest number of paths held in memory at once when many "
                "target points are estimated together. Part of the "
                "reproducibility contract together with SDE_PATHS_PER_STREAM.",
    default=262144,
)
