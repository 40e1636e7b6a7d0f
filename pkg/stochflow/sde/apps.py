from django.apps import AppConfig


class SdeConfig(AppConfig):
    name = 'stochflow.sde'
