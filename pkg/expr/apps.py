from django.apps import AppConfig


class ExprConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "expr"
    verbose_name = "Expresiones simbólicas"
