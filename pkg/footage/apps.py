from django.apps import AppConfig


class FootageConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'footage'
