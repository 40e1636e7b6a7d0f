from django.apps import AppConfig


class RecoveryConfig(AppConfig):
    name = 'stochflow.recovery'
