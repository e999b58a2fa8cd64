"""
Tipos de la geometría de marcos.

- FrameData: marco e_1..e_n con métrica constante por bloques
  2 g_{a c̄} Θ^a Θ^c̄ + g_{AB} Θ^A Θ^B, funciones de estructura r^k_ij y
  bloques explícitos: nulo (a), medio (A) y dual (ā).
- SemidirectAlgebra: datos de h ⋉_φ k con k nilpotente de dos pasos.
"""
import itertools
from dataclasses import dataclass, field
from functools import cached_property

import sympy

from core.errors import DegenerateMetricError, DimensionError, InputError
from expr.services import is_zero, normal
from tensor.models import Metric, _as_symbol


def _rational_matrix(rows):
    matrix = sympy.Matrix(rows)
    for value in matrix:
        if not sympy.sympify(value).is_Rational:
            raise InputError("La métrica del marco debe ser constante y racional", witness=value)
    return matrix


@dataclass(frozen=True)
class FrameData:
    """
    Marco de Walker.
    - p: rango de la distribución nula N = span(e_1..e_p).
    - gframe: matriz constante n×n.
    - structure: r[k][i][j] con [e_i, e_j] = r^k_ij e_k.
    - coords/vector_fields: realización en coordenadas (opcional).
    """

    n: int
    p: int
    gframe: tuple
    structure: tuple
    coords: tuple = ()
    vector_fields: tuple | None = None
    functions: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        n, p = self.n, self.p
        if not 1 <= p <= n // 2:
            raise DimensionError(f"Rango nulo inválido p={p} para n={n}")
        g = _rational_matrix(self.gframe)
        if g.shape != (n, n) or g != g.T:
            raise InputError("La métrica del marco no es simétrica n×n")
        for i, j in itertools.product(range(n), repeat=2):
            block_i, block_j = self.block_of(i), self.block_of(j)
            allowed = {("null", "dual"), ("dual", "null"), ("middle", "middle")}
            if g[i, j] != 0 and (block_i, block_j) not in allowed:
                raise InputError(
                    f"gframe[{i},{j}] fuera de la forma por bloques", witness=(i, j, g[i, j])
                )
        if g[:p, n - p:].det() == 0:
            raise DegenerateMetricError("El bloque g_{a c̄} es degenerado")
        if n - 2 * p and g[p:n - p, p:n - p].det() == 0:
            raise DegenerateMetricError("El bloque g_{AB} es degenerado")
        for k, i, j in itertools.product(range(n), repeat=3):
            if not is_zero(normal(self.structure[k][i][j] + self.structure[k][j][i])):
                raise InputError(f"r^{k}_({i},{j}) no es antisimétrica", witness=(k, i, j))

    # ------------------------------------------------------------------
    @classmethod
    def from_structure(cls, gframe, structure, p, name="") -> "FrameData":
        """Marco abstracto (grupo de Lie): solo constantes de estructura."""
        n = len(gframe)
        r = tuple(
            tuple(tuple(sympy.sympify(structure[k][i][j]) for j in range(n)) for i in range(n))
            for k in range(n)
        )
        return cls(n=n, p=p, gframe=tuple(tuple(row) for row in gframe), structure=r, name=name)

    @classmethod
    def from_vector_fields(cls, coords, rows, gframe, p, functions=None, name="") -> "FrameData":
        """Deriva r^k_ij de los corchetes de los campos e_i = E[i][mu] d_mu."""
        metric = Metric.in_frame(coords, rows, gframe, functions=functions, name=name)
        return cls(
            n=metric.n,
            p=p,
            gframe=tuple(tuple(row) for row in gframe),
            structure=metric.structure_functions(),
            coords=metric.coords,
            vector_fields=metric.frame,
            functions=dict(functions or {}),
            name=name,
        )

    # ------------------------------------------------------------------
    def block_of(self, i) -> str:
        if i < self.p:
            return "null"
        if i < self.n - self.p:
            return "middle"
        return "dual"

    @property
    def null_block(self):
        return range(0, self.p)

    @property
    def middle_block(self):
        return range(self.p, self.n - self.p)

    @property
    def dual_block(self):
        return range(self.n - self.p, self.n)

    @property
    def is_realized(self) -> bool:
        return self.vector_fields is not None

    def r(self, k, i, j):
        return self.structure[k][i][j]

    @cached_property
    def metric(self) -> Metric:
        rows = self.vector_fields
        if rows is None:
            rows = tuple(() for _ in range(self.n))
        return Metric(
            coords=tuple(_as_symbol(c) for c in self.coords),
            components=tuple(tuple(sympy.sympify(v) for v in row) for row in self.gframe),
            frame=rows,
            structure=self.structure,
            functions=dict(self.functions),
            name=self.name,
        )

    def apply(self, i, f):
        return self.metric.apply(i, f)


@dataclass(frozen=True)
class SemidirectAlgebra:
    """
    g = h ⋉_φ k en la base (e_a | e_A | e_ā):
    - k_brackets[(A, B)] = {c: r^c_AB} para A, B del bloque medio.
    - action[(ā, i)] = {j: coef} con [e_ā, e_i] = coef e_j, i en k.
    - h_brackets[(ā, b̄)] = {c̄: r^c̄_āb̄}.
    - g_null_dual: matriz p×p de g_{a c̄}; g_middle: matriz de g_{AB}.
    """

    p: int
    q: int
    k_brackets: dict = field(default_factory=dict)
    action: dict = field(default_factory=dict)
    h_brackets: dict = field(default_factory=dict)
    g_null_dual: tuple = ()
    g_middle: tuple = ()
    name: str = ""

    @property
    def n(self) -> int:
        return self.p + self.q

    def structure_constants(self):
        """r[k][i][j] del álgebra ensamblada (antisimetrizada)."""
        n = self.n
        r = [[[sympy.Integer(0)] * n for _ in range(n)] for _ in range(n)]

        def put(i, j, values):
            for k, value in values.items():
                value = sympy.Rational(value)
                r[k][i][j] += value
                r[k][j][i] -= value

        for (i, j), values in self.k_brackets.items():
            put(i, j, values)
        for (i, j), values in self.action.items():
            put(i, j, values)
        for (i, j), values in self.h_brackets.items():
            put(i, j, values)
        return r

    def gframe(self):
        n, p = self.n, self.p
        g = sympy.zeros(n, n)
        for a, c in itertools.product(range(p), repeat=2):
            value = sympy.Rational(self.g_null_dual[a][c])
            g[a, n - p + c] = value
            g[n - p + c, a] = value
        middle = n - 2 * p
        for A, B in itertools.product(range(middle), repeat=2):
            g[p + A, p + B] = sympy.Rational(self.g_middle[A][B])
        return g.tolist()
