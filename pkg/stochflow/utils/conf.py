import os
import sys
from warnings import warn


def set_dynamic_settings(s):
    """
    Called at the end of the project's settings module, and is passed
    its globals dict for updating with some final tweaks for settings
    that generally aren't specified, but can be given some better
    defaults based on other settings that have been specified.
    """

    # Add a value to the end of a list setting if not in the list.
    append = lambda n, k: s[n].append(k) if k not in s[n] else None

    # Some kind of testing is running via pytest or the test command.
    management_command = sys.argv[1] if len(sys.argv) > 1 else ""
    s["TESTING"] = (management_command == "test"
                    or "pytest" in os.path.basename(sys.argv[0]))

    # Worker threads only speed things up; never ask for more than
    # the machine has.
    cpus = os.cpu_count() or 1
    workers = int(s.get("SDE_WORKERS", 1) or 1)
    if workers > cpus:
        warn("SDE_WORKERS is %d but only %d CPUs are available, "
             "using %d." % (workers, cpus, cpus))
        workers = cpus
    s["SDE_WORKERS"] = max(workers, 1)

    s.setdefault("STOCHFLOW_OUTPUT_ROOT", os.path.join(os.getcwd(), "runs"))
    s["STOCHFLOW_OUTPUT_ROOT"] = str(s["STOCHFLOW_OUTPUT_ROOT"])

    # The scenario runner writes figures off-screen.
    os.environ.setdefault("MPLBACKEND", "Agg")

    # Ensure the scenario app, which registers the system checks and
    # the command line, is always installed.
    append("INSTALLED_APPS", "stochflow.scenarios")
