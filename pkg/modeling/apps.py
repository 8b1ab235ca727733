from django.apps import AppConfig


class ModelingConfig(AppConfig):
    name = 'modeling'
    verbose_name = 'GlowVC model'
