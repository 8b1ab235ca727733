from django.apps import AppConfig


class SynthlabConfig(AppConfig):
    name = 'synthlab'
    verbose_name = 'Synthetic corpus and metrics'
