from django.apps import AppConfig


class GapfillConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'gapfill'
