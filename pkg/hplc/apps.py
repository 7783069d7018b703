from django.apps import AppConfig


class HplcConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'hplc'
