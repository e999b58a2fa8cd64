import sympy

from django.conf import settings


def get_seed() -> int:
    return int(getattr(settings, "AMBIENTFORGE_SEED", 20240601))


def get_tolerance() -> float:
    return float(getattr(settings, "AMBIENTFORGE_TOLERANCE", 1e-6))


def get_fd_step() -> float:
    return float(getattr(settings, "AMBIENTFORGE_FD_STEP", 1e-4))


def get_sample_points() -> int:
    return int(getattr(settings, "AMBIENTFORGE_SAMPLE_POINTS", 10))


def get_obstruction_norm() -> sympy.Rational:
    """Constante multiplicativa de la obstrucción (1 = normalización canónica)."""
    return sympy.Rational(str(getattr(settings, "AMBIENTFORGE_OBSTRUCTION_NORM", "1")))


def get_report_schema() -> str:
    return str(getattr(settings, "AMBIENTFORGE_REPORT_SCHEMA", "1"))
