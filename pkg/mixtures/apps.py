from django.apps import AppConfig


class MixturesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'mixtures'
