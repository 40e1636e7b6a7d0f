"""
Default settings for the ``stochflow.scenarios`` app. Each of these can
be overridden in your project's settings module, just like regular
Django settings.
"""
from stochflow.conf import register_setting


register_setting(
    name="SCENARIO_SCHEMA_VERSION",
    description="Version of the scenario JSON schema this code reads and "
                "writes into run metadata.",
    default=1,
)

register_setting(
    name="SCENARIO_ORACLE_SHAPE",
    description="Nodes per axis of the grid the reference solvers use when "
                "a scenario asks for an oracle.",
    default=32,
)

register_setting(
    name="SCENARIO_PLOT_DPI",
    description="Resolution of the static plots written next to results.",
    default=100,
)
