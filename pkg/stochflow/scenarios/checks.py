import os

from django.conf import settings
from django.core.checks import Warning, register

REQUIRED_APPS = (
    "stochflow.core",
    "stochflow.sde",
    "stochflow.fields",
    "stochflow.reference",
    "stochflow.transport",
    "stochflow.recovery",
    "stochflow.navierstokes",
    "stochflow.dynamo",
    "stochflow.driftless",
)


@register
def check_solver_apps(app_configs, **kwargs):

    issues = []

    missing = [app for app in REQUIRED_APPS
               if app not in settings.INSTALLED_APPS]
    if missing:
        issues.append(Warning(
            "The solver apps %s are not in INSTALLED_APPS. Their tunables "
            "will not be registered and scenarios using them will fail."
            % ", ".join(missing),
            id="stochflow.scenarios.W01"
        ))

    return issues


@register
def check_output_root(app_configs, **kwargs):

    issues = []

    root = getattr(settings, "STOCHFLOW_OUTPUT_ROOT", None)
    parent = os.path.dirname(os.path.abspath(root)) if root else None
    if root and not os.access(root if os.path.isdir(root) else parent,
                              os.W_OK):
        issues.append(Warning(
            "STOCHFLOW_OUTPUT_ROOT (%s) is not writable; pass --output-dir "
            "to the scenario command." % root,
            id="stochflow.scenarios.W02"
        ))

    return issues
