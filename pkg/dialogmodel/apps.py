from django.apps import AppConfig


class DialogmodelConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "dialogmodel"
