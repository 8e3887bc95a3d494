from django.apps import AppConfig


class NnkitConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "nnkit"
