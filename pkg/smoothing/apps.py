from django.apps import AppConfig


class SmoothingConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'smoothing'
