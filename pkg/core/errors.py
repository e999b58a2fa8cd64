"""
Jerarquía de errores compartida por todas las apps.

- ForgeError: base; `witness` guarda la expresión o valor que demuestra la falla.
- InputError y derivados: entradas mal formadas (código de salida 2 en la CLI).
- El resto: fallas matemáticas o precondiciones (código de salida 1).
"""


class ForgeError(Exception):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


# ---------------------------------------------------------------------------
# Entrada
# ---------------------------------------------------------------------------
class InputError(ForgeError):
    pass


class ExprSyntaxError(InputError):
    def __init__(self, message: str, text: str = "", position: int = 0):
        super().__init__(f"{message} (posición {position})")
        self.text = text
        self.position = position


class ArityError(InputError):
    pass


class UnboundAtomError(InputError):
    pass


class RhoDependenceError(InputError):
    pass


class MetricFileError(InputError):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"línea {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


# ---------------------------------------------------------------------------
# Geometría y series
# ---------------------------------------------------------------------------
class DegenerateMetricError(ForgeError):
    pass


class DimensionError(ForgeError):
    pass


class RankMismatchError(ForgeError):
    pass


class TruncationError(ForgeError):
    pass


class PreconditionError(ForgeError):
    """Una hipótesis no se cumple; `relation` nombra la relación violada."""

    def __init__(self, message: str, relation: str = "", witness=None):
        super().__init__(message, witness=witness)
        self.relation = relation


class AlgebraIdentityError(PreconditionError):
    pass


class ObstructedError(ForgeError):
    """La expansión par choca con una obstrucción no nula."""

    def __init__(self, message: str, obstruction=None):
        super().__init__(message, witness=obstruction)
        self.obstruction = obstruction


class OracleError(ForgeError):
    pass


class SeriesError(ForgeError):
    pass
