from django.apps import AppConfig


class DynamoConfig(AppConfig):
    name = 'stochflow.dynamo'
