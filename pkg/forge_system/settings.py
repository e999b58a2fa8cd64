"""
Django settings for forge_system project.
Proyecto sin base de datos: las apps exponen cálculo simbólico y comandos de manage.py.
"""

from pathlib import Path
import os

from dotenv import load_dotenv

# ====== Paths ======
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / ".env")

# ====== Seguridad y modo debug ======
SECRET_KEY = os.getenv("SECRET_KEY", "ambientforge-local-sin-servidor")
DEBUG = os.getenv("DEBUG", "1") == "1"
ALLOWED_HOSTS = []

# ====== Apps ======
INSTALLED_APPS = [
    "core.apps.CoreConfig",
    "expr.apps.ExprConfig",
    "tensor.apps.TensorConfig",
    "frame.apps.FrameConfig",
    "ambient.apps.AmbientConfig",
    "oracle.apps.OracleConfig",
    "cli.apps.CliConfig",
]

# ====== Base de datos ======
DATABASES = {}

# ====== Internacionalización ======
LANGUAGE_CODE = "es-ar"
TIME_ZONE = "America/Argentina/Buenos_Aires"
USE_I18N = True
USE_TZ = True

# ====== Default PK ======
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# ====== Cálculo ======
AMBIENTFORGE_SEED = int(os.getenv("AMBIENTFORGE_SEED", "20240601"))
AMBIENTFORGE_TOLERANCE = float(os.getenv("AMBIENTFORGE_TOLERANCE", "1e-6"))
AMBIENTFORGE_FD_STEP = float(os.getenv("AMBIENTFORGE_FD_STEP", "1e-4"))
AMBIENTFORGE_SAMPLE_POINTS = int(os.getenv("AMBIENTFORGE_SAMPLE_POINTS", "10"))
AMBIENTFORGE_OBSTRUCTION_NORM = os.getenv("AMBIENTFORGE_OBSTRUCTION_NORM", "1")  # canónica
AMBIENTFORGE_REPORT_SCHEMA = os.getenv("AMBIENTFORGE_REPORT_SCHEMA", "1")
AMBIENTFORGE_LOG_LEVEL = os.getenv("AMBIENTFORGE_LOG_LEVEL", "INFO")

# ====== Logging ======
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {"format": "{levelname} {asctime} {name}: {message}", "style": "{"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "verbose"},
    },
    "loggers": {
        app: {"handlers": ["console"], "level": AMBIENTFORGE_LOG_LEVEL, "propagate": False}
        for app in ("core", "expr", "tensor", "frame", "ambient", "oracle", "cli")
    },
}
