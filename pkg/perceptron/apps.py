from django.apps import AppConfig


class PerceptronConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'perceptron'
