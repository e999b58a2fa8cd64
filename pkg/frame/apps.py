from django.apps import AppConfig


class FrameConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "frame"
    verbose_name = "Marcos y métricas de Walker"
