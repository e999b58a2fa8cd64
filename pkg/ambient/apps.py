from django.apps import AppConfig


class AmbientConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "ambient"
    verbose_name = "Métricas ambiente"
