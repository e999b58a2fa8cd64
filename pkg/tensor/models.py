"""
Tipos de la capa tensorial.

- Metric: métrica en coordenadas (marco holónomo) o en un marco anholónomo
  e_i = E[i][mu] d_mu con funciones de estructura r^k_ij. Las componentes
  pueden ser expresiones de sympy o RhoSeries.
- TensorField: arreglo de componentes (numpy, dtype=object) con la firma de
  índices ("u" contravariante, "d" covariante) y simetrías declaradas.
"""
import itertools
import threading
from dataclasses import dataclass, field

import numpy as np
import sympy

from core.errors import DimensionError, InputError, RankMismatchError
from expr.services import is_zero, normal, symbol


def _as_symbol(name):
    return name if isinstance(name, sympy.Symbol) else symbol(name)


@dataclass(frozen=True, eq=False)
class Metric:
    """
    Métrica pseudo-riemanniana.
    - coords: coordenadas en las que se derivan las componentes.
    - components: matriz n×n simétrica (tupla de tuplas).
    - frame: filas E[i] (None = marco holónomo de coords).
    - structure: r[k][i][j] con [e_i, e_j] = r^k_ij e_k (None = se deriva del marco).
    - inverse: inversa ya conocida (p.ej. serie de Neumann), opcional.
    Los valores derivados (inversa, Christoffel, curvatura) se guardan en una
    tabla por métrica protegida con un RLock; se puede compartir entre hilos.
    """

    coords: tuple
    components: tuple
    frame: tuple | None = None
    structure: tuple | None = None
    inverse: tuple | None = None
    functions: dict = field(default_factory=dict)
    name: str = ""
    _memo: dict = field(default_factory=dict, repr=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    def __post_init__(self):
        n = len(self.components)
        if any(len(row) != n for row in self.components):
            raise DimensionError(f"La matriz de la métrica no es cuadrada ({n} filas)")
        if self.frame is None and len(self.coords) != n:
            raise DimensionError(
                f"{len(self.coords)} coordenadas para una métrica de dimensión {n}"
            )
        if self.frame is not None and len(self.frame) != n:
            raise DimensionError("El marco no tiene n campos")
        for i, j in itertools.combinations(range(n), 2):
            if not is_zero(normal(self.components[i][j] - self.components[j][i])):
                raise InputError(f"La métrica no es simétrica en ({i}, {j})", witness=(i, j))

    # ------------------------------------------------------------------
    @classmethod
    def from_matrix(cls, coords, matrix, functions=None, name="") -> "Metric":
        coords = tuple(_as_symbol(c) for c in coords)
        rows = tuple(tuple(normal(entry) for entry in row) for row in matrix)
        return cls(coords=coords, components=rows, functions=dict(functions or {}), name=name)

    @classmethod
    def in_frame(cls, coords, frame_rows, gframe, structure=None, functions=None, name="") -> "Metric":
        coords = tuple(_as_symbol(c) for c in coords)
        frame = tuple(tuple(normal(sympy.sympify(e)) for e in row) for row in frame_rows)
        rows = tuple(tuple(normal(entry) for entry in row) for row in gframe)
        return cls(
            coords=coords,
            components=rows,
            frame=frame,
            structure=structure,
            functions=dict(functions or {}),
            name=name,
        )

    def with_components(self, components, inverse=None, name=None) -> "Metric":
        """Misma geometría de marco con otras componentes (g0 + h, por ejemplo)."""
        return Metric(
            coords=self.coords,
            components=tuple(tuple(row) for row in components),
            frame=self.frame,
            structure=self.structure,
            inverse=inverse,
            functions=self.functions,
            name=self.name if name is None else name,
        )

    # ------------------------------------------------------------------
    def memoized(self, key, compute):
        """compute() se evalúa una sola vez por clave, aun con varios hilos."""
        with self._lock:
            if key not in self._memo:
                self._memo[key] = compute()
            return self._memo[key]

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def is_holonomic(self) -> bool:
        return self.frame is None

    def g(self, i, j):
        return self.components[i][j]

    def matrix(self) -> sympy.Matrix:
        return sympy.Matrix(self.components)

    def apply(self, i, f):
        """e_i(f): derivada direccional a lo largo del i-ésimo campo del marco."""
        if is_zero(f):
            return sympy.Integer(0)
        if getattr(f, "is_series", False):
            return f.map(lambda c: self.apply(i, c))
        f = sympy.sympify(f)
        if self.frame is None:
            return normal(sympy.diff(f, self.coords[i]))
        total = sympy.Integer(0)
        for mu, coefficient in enumerate(self.frame[i]):
            if coefficient != 0:
                total += coefficient * sympy.diff(f, self.coords[mu])
        return normal(total)

    def structure_functions(self):
        """r[k][i][j]; None si el marco es holónomo."""
        if self.frame is None:
            return None
        if self.structure is not None:
            return self.structure
        return self.memoized("structure", lambda: _structure_from_frame(self))


def _structure_from_frame(metric: Metric):
    """r^k_ij = sum_mu [e_i, e_j]^mu (E^-1)[mu, k]."""
    n = metric.n
    if len(metric.coords) != n:
        raise DimensionError("El marco debe ser cuadrado para derivar las funciones de estructura")
    E = sympy.Matrix(metric.frame)
    det = normal(E.det(method="berkowitz"))
    if det == 0:
        raise DimensionError("Los campos del marco son linealmente dependientes")
    E_inv = (E.adjugate(method="berkowitz") / det).applyfunc(normal)
    r = [[[sympy.Integer(0)] * n for _ in range(n)] for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        bracket = [
            normal(metric.apply(i, metric.frame[j][mu]) - metric.apply(j, metric.frame[i][mu]))
            for mu in range(n)
        ]
        for k in range(n):
            value = normal(sum(bracket[mu] * E_inv[mu, k] for mu in range(n) if bracket[mu] != 0))
            r[k][i][j] = value
            r[k][j][i] = -value
    return tuple(tuple(tuple(row) for row in block) for block in r)


@dataclass(frozen=True, eq=False)
class TensorField:
    """Tensor con componentes indexadas sobre el marco de una métrica."""

    signature: tuple
    components: np.ndarray
    symmetries: tuple = ()
    name: str = ""

    @classmethod
    def zeros(cls, signature, n, name="", symmetries=()) -> "TensorField":
        signature = tuple(signature)
        components = np.empty((n,) * len(signature), dtype=object)
        components.fill(sympy.Integer(0))
        return cls(signature, components, tuple(symmetries), name)

    @classmethod
    def from_function(cls, signature, n, fn, name="", symmetries=()) -> "TensorField":
        tensor = cls.zeros(signature, n, name, symmetries)
        for index in itertools.product(range(n), repeat=len(tensor.signature)):
            tensor.components[index] = normal(fn(*index))
        return tensor

    @classmethod
    def from_matrix(cls, matrix, signature=("d", "d"), name="") -> "TensorField":
        n = len(matrix)
        return cls.from_function(signature, n, lambda i, j: matrix[i][j], name=name)

    # ------------------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.signature)

    @property
    def n(self) -> int:
        return self.components.shape[0] if self.rank else 0

    def __getitem__(self, index):
        return self.components[index]

    def indices(self):
        return itertools.product(range(self.n), repeat=self.rank)

    def nonzero_items(self):
        return [(index, self.components[index]) for index in self.indices() if not is_zero(self.components[index])]

    def is_zero(self) -> bool:
        return not self.nonzero_items()

    def map(self, fn, name=None) -> "TensorField":
        components = np.empty(self.components.shape, dtype=object)
        for index in self.indices():
            components[index] = normal(fn(self.components[index]))
        return TensorField(self.signature, components, self.symmetries, self.name if name is None else name)

    def _check_compatible(self, other):
        if self.signature != other.signature or self.components.shape != other.components.shape:
            raise RankMismatchError(
                f"Firmas incompatibles: {self.signature} y {other.signature}",
                witness=(self.signature, other.signature),
            )

    def __add__(self, other) -> "TensorField":
        self._check_compatible(other)
        result = TensorField.zeros(self.signature, self.n, self.name)
        for index in self.indices():
            result.components[index] = normal(self.components[index] + other.components[index])
        return result

    def __neg__(self) -> "TensorField":
        return self.map(lambda c: -c)

    def __sub__(self, other) -> "TensorField":
        return self + (-other)

    def scale(self, factor) -> "TensorField":
        return self.map(lambda c: factor * c)

    def difference(self, other):
        """Primer índice donde difieren y el valor de la diferencia (None si son iguales)."""
        self._check_compatible(other)
        for index in self.indices():
            delta = normal(self.components[index] - other.components[index])
            if not is_zero(delta):
                return index, delta
        return None

    def equals(self, other) -> bool:
        return self.difference(other) is None

    def check_symmetries(self):
        """Lista de violaciones de las simetrías declaradas: (tipo, par, índice)."""
        violations = []
        for kind, (a, b) in self.symmetries:
            sign = 1 if kind == "sym" else -1
            for index in self.indices():
                swapped = list(index)
                swapped[a], swapped[b] = swapped[b], swapped[a]
                delta = normal(self.components[index] - sign * self.components[tuple(swapped)])
                if not is_zero(delta):
                    violations.append((kind, (a, b), index))
                    break
        return violations

    def matrix(self) -> sympy.Matrix:
        if self.rank != 2:
            raise RankMismatchError("Solo los tensores de rango 2 tienen matriz", witness=self.signature)
        return sympy.Matrix(self.n, self.n, lambda i, j: self.components[i, j])
