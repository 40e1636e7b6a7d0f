from django.apps import AppConfig


class DriftlessConfig(AppConfig):
    name = 'stochflow.driftless'
