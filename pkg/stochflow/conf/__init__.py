from importlib import import_module
from warnings import warn

from django.conf import settings as django_settings
from django.utils.module_loading import module_has_submodule


registry = {}


def register_setting(name=None, label=None, description=None, default=None,
                     choices=None, append=False):
    """
    Registers a numerical tunable. This mostly equates to storing the
    given args as a dict in the ``registry`` dict by name. A value of the
    same name in the project's settings module always wins over the
    registered default.
    """
    if name is None:
        raise TypeError("stochflow.conf.register_setting requires the "
                        "'name' keyword argument.")

    # append is True when called from an app after the setting has
    # already been registered, with the intention of appending to its
    # default value.
    if append and name in registry:
        registry[name]["default"] += default
        return

    if label is None:
        label = name.replace("_", " ").title()

    if isinstance(default, bool):
        # Prevent bools treated as ints
        setting_type = bool
    elif isinstance(default, int):
        setting_type = int
    elif isinstance(default, float):
        setting_type = float
    elif isinstance(default, str):
        setting_type = str
    else:
        setting_type = type(default)
    registry[name] = {"name": name, "label": label,
                      "description": description, "default": default,
                      "choices": choices, "type": setting_type}


class Settings(object):
    """
    An object that provides settings via dynamic attribute access.

    Registered tunables resolve to the project's settings module first
    and to their registered default otherwise. Anything that isn't
    registered is looked up on ``django.conf.settings``, in order to
    provide a consistent method of access for all settings.
    """

    # These functions map setting types to the functions that should be
    # used to convert them from environment strings. If a type doesn't
    # appear in this map, the type itself will be used.
    TYPE_FUNCTIONS = {
        bool: lambda val: str(val).lower() not in ("false", "0", "no", ""),
        int: lambda val: int(float(val)),
    }

    @classmethod
    def _to_python(cls, setting, raw_value):
        """
        Convert a value found in the project settings for a particular
        setting to its correct type, as determined by
        ``register_setting()``.
        """
        if isinstance(raw_value, setting["type"]) and not (
                setting["type"] is int and isinstance(raw_value, bool)):
            value = raw_value
        else:
            type_fn = cls.TYPE_FUNCTIONS.get(setting["type"], setting["type"])
            try:
                value = type_fn(raw_value)
            except (TypeError, ValueError):
                warn("The setting %s should be of type %s, but the value "
                     "found in the settings module (%s) could not be "
                     "converted. Using the default instead: %s"
                     % (setting["name"], setting["type"].__name__,
                        repr(raw_value), repr(setting["default"])))
                value = setting["default"]

        if setting["choices"] and value not in setting["choices"]:
            warn("The setting %s has value %r, which is not one of %r. "
                 "Using the default instead: %r"
                 % (setting["name"], value, setting["choices"],
                    setting["default"]))
            value = setting["default"]
        return value

    def __getattr__(self, name):

        # If this setting isn't registered, defer to Django's settings object
        try:
            setting = registry[name]
        except KeyError:
            return getattr(django_settings, name)

        return self._to_python(
            setting, getattr(django_settings, name, setting["default"]))

    def __setattr__(self, key, value):
        """Forward attribute setting to the Django settings object."""
        setattr(django_settings, key, value)

    def __delattr__(self, item):
        """Forward attribute deletion to the Django settings object."""
        delattr(django_settings, item)


own_first = lambda app: not app.startswith("stochflow.")
for app in sorted(django_settings.INSTALLED_APPS, key=own_first):
    try:
        module = import_module(app)
    except ImportError:
        pass
    else:
        try:
            import_module("%s.defaults" % app)
        except ImportError:
            if module_has_submodule(module, "defaults"):
                raise

settings = Settings()
