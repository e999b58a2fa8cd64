"""
Tipos del oráculo numérico.

- SamplePoint: punto de muestreo (coordenadas en float) con el paso de
  diferencias finitas y los átomos de función realizados como expresiones.
- OracleReport: discrepancia relativa máxima sobre los puntos comparados.
"""
from dataclasses import dataclass, field

import numpy as np

from core.errors import OracleError

DET_THRESHOLD = 1e-8


@dataclass(frozen=True)
class SamplePoint:
    coords: tuple
    step: float = 1e-4
    bindings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.step <= 0:
            raise OracleError(f"Paso de diferencias finitas inválido: {self.step}")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def with_step(self, step: float) -> "SamplePoint":
        return SamplePoint(self.coords, step, self.bindings)

    @staticmethod
    def require_nondegenerate(matrix: np.ndarray, coords=None):
        det = float(np.linalg.det(matrix))
        if not np.isfinite(det) or abs(det) <= DET_THRESHOLD:
            raise OracleError(f"Métrica casi degenerada en {coords}: det = {det:.3e}", witness=det)
        return det


@dataclass(frozen=True)
class OracleReport:
    discrepancy: float
    threshold: float
    points: int
    worst: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.threshold

    def __str__(self):
        estado = "Pasa" if self.passed else "Falla"
        return f"{estado} · discrepancia {self.discrepancy:.3e} (umbral {self.threshold:.1e}, {self.points} puntos)"
