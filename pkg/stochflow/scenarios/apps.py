from django.apps import AppConfig


class ScenariosConfig(AppConfig):

    name = 'stochflow.scenarios'

    def ready(self):
        from . import checks  # noqa
