"""
Tipos de la dirección rho.

- AmbientMetric: g0 + h(rho) y la métrica (n+2)-dimensional
  2 dt d(rho t) + t^2 g(x, rho) sobre (t, x^i, rho).
- FGResiduals: las tres familias de residuos de Fefferman-Graham como series.
- ObstructionTensor: obstrucción canónica con su constante de normalización.
- NilpotentRicci: Ricci de g0 + h descompuesto por grado en h.
"""
import itertools
from dataclasses import dataclass, field

import sympy

from core.errors import DimensionError, InputError
from core.models import Check
from expr.models import RhoSeries
from expr.services import RHO, is_zero, normal, rho_coefficients
from tensor.models import Metric, TensorField, _as_symbol

T_COORD = sympy.Symbol("t", positive=True)


def as_series(value, truncation=sympy.oo) -> RhoSeries:
    if getattr(value, "is_series", False):
        return value.truncated(truncation)
    return rho_coefficients(value).truncated(truncation)


def series_tensor(components, signature=("d", "d"), truncation=sympy.oo, name="") -> TensorField:
    """TensorField cuyas componentes son RhoSeries."""
    tensor = TensorField.zeros(signature, len(components), name)
    for index in tensor.indices():
        entry = components
        for i in index:
            entry = entry[i]
        tensor.components[index] = as_series(entry, truncation)
    return tensor


def truncate_tensor(T: TensorField, truncation) -> TensorField:
    return T.map(lambda c: as_series(c, truncation))


def first_nonzero_term(T: TensorField, limit=None):
    """(índice, exponente, potencia de log, coeficiente) del primer término con exponente < limit."""
    for index in T.indices():
        value = T.components[index]
        if not getattr(value, "is_series", False):
            value = as_series(value)
        for (exponent, log_power), coefficient in value.items():
            if limit is None or exponent < limit:
                return index, exponent, log_power, coefficient
    return None


@dataclass(frozen=True, eq=False)
class AmbientMetric:
    """
    Métrica ambiente asociada a g(rho) = g0 + h(rho).
    - h: TensorField ("d", "d") de RhoSeries sin término rho^0.
    - Las componentes están en el marco de g0 (coordenadas o marco de Walker).
    """

    base: Metric
    h: TensorField
    name: str = ""
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.base.n
        if self.h.signature != ("d", "d") or self.h.n != n:
            raise DimensionError(f"h debe ser un tensor (0,2) de dimensión {n}")
        for i, j in itertools.product(range(n), repeat=2):
            entry = self.h[i, j]
            if not getattr(entry, "is_series", False):
                raise InputError(f"h[{i},{j}] no es una serie en rho", witness=entry)
            if i < j and not is_zero(entry - self.h[j, i]):
                raise InputError(f"h no es simétrica en ({i}, {j})", witness=(i, j))
            for exponent, log_power in entry.terms:
                if exponent <= 0:
                    raise InputError(
                        f"h[{i},{j}] no se anula en rho = 0 (término rho^{exponent})",
                        witness=(i, j, exponent, log_power),
                    )

    # ------------------------------------------------------------------
    @classmethod
    def build(cls, base: Metric, h_rows, truncation=sympy.oo, name="", notes=None) -> "AmbientMetric":
        """h_rows: matriz de expresiones en rho (y log rho) o de RhoSeries."""
        return cls(
            base=base,
            h=series_tensor(h_rows, truncation=truncation, name="h"),
            name=name,
            notes=dict(notes or {}),
        )

    @classmethod
    def trivial(cls, base: Metric, name="") -> "AmbientMetric":
        n = base.n
        return cls.build(base, [[0] * n for _ in range(n)], name=name)

    # ------------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.base.n

    @property
    def truncation(self):
        return min((entry.truncation for _, entry in self._entries()), default=sympy.oo)

    @property
    def is_exact(self) -> bool:
        return self.truncation == sympy.oo

    def _entries(self):
        return ((index, self.h.components[index]) for index in self.h.indices())

    def has_logs(self) -> bool:
        return any(log_power for _, entry in self._entries() for _, log_power in entry.terms)

    def exponents(self):
        return sorted({exponent for _, entry in self._entries() for exponent, _ in entry.terms})

    def coefficient(self, exponent, log_power=0) -> TensorField:
        """g^(k): coeficiente de rho^k (log_power = 1 para rho^k log rho)."""
        return TensorField.from_function(
            ("d", "d"),
            self.n,
            lambda i, j: self.h[i, j].coefficient(exponent, log_power),
            name=f"g^({exponent})",
        )

    def truncated(self, truncation) -> "AmbientMetric":
        return AmbientMetric(self.base, truncate_tensor(self.h, truncation), self.name, self.notes)

    def g_rho(self, truncation=None) -> Metric:
        """g(rho) = g0 + h con componentes RhoSeries."""
        h = self.h if truncation is None else truncate_tensor(self.h, truncation)
        rows = [[h[i, j] + self.base.g(i, j) for j in range(self.n)] for i in range(self.n)]
        return self.base.with_components(rows, name=f"{self.base.name} + h".strip())

    def g_rho_expr(self):
        """g(rho) como matriz de expresiones (h exacta con exponentes enteros)."""
        rows = []
        for i in range(self.n):
            rows.append([normal(self.base.g(i, j) + self.h[i, j].to_expr()) for j in range(self.n)])
        return rows

    def full_metric(self) -> Metric:
        """
        2 dt d(rho t) + t^2 g(x, rho) en el orden (t, x^i, rho).
        La inversa es explícita: bloque (t, rho) [[0, 1/t], [1/t, -2 rho/t^2]] y g^{ij}/t^2.
        """
        n = self.n
        g = self.g_rho_expr()
        matrix = sympy.Matrix(g)
        det = normal(matrix.det(method="berkowitz"))
        if det == 0:
            raise DimensionError("g(rho) degenerada")
        adjugate = matrix.adjugate(method="berkowitz")
        size = n + 2
        rows = [[sympy.Integer(0)] * size for _ in range(size)]
        inverse = [[sympy.Integer(0)] * size for _ in range(size)]
        rows[0][0] = 2 * RHO
        rows[0][size - 1] = rows[size - 1][0] = T_COORD
        inverse[0][size - 1] = inverse[size - 1][0] = 1 / T_COORD
        inverse[size - 1][size - 1] = -2 * RHO / T_COORD**2
        for i, j in itertools.product(range(n), repeat=2):
            rows[1 + i][1 + j] = normal(T_COORD**2 * g[i][j])
            inverse[1 + i][1 + j] = normal(adjugate[i, j] / (det * T_COORD**2))

        base = self.base
        name = f"ambiente de {base.name}".strip()
        if base.is_holonomic:
            coords = (T_COORD,) + tuple(base.coords) + (RHO,)
            return Metric(
                coords=coords,
                components=tuple(tuple(row) for row in rows),
                inverse=tuple(tuple(row) for row in inverse),
                functions=base.functions,
                name=name,
            )
        # marco: e_t = d_t, e_i = E_i, e_rho = d_rho; los corchetes nuevos se anulan
        coords = (T_COORD,) + tuple(_as_symbol(c) for c in base.coords) + (RHO,)
        width = len(coords)
        frame = [[sympy.Integer(0)] * width for _ in range(size)]
        frame[0][0] = sympy.Integer(1)
        frame[size - 1][width - 1] = sympy.Integer(1)
        for i in range(n):
            for mu, value in enumerate(base.frame[i]):
                frame[1 + i][1 + mu] = value
        r = base.structure_functions()
        structure = [[[sympy.Integer(0)] * size for _ in range(size)] for _ in range(size)]
        for k, i, j in itertools.product(range(n), repeat=3):
            structure[1 + k][1 + i][1 + j] = r[k][i][j]
        return Metric(
            coords=coords,
            components=tuple(tuple(row) for row in rows),
            frame=tuple(tuple(row) for row in frame),
            structure=tuple(tuple(tuple(row) for row in block) for block in structure),
            inverse=tuple(tuple(row) for row in inverse),
            functions=base.functions,
            name=name,
        )


@dataclass(frozen=True, eq=False)
class FGResiduals:
    """
    E1_ij, E2_i y E3 como series en rho.
    E1 y E2 son exactos para exponentes < order; E3 para exponentes < order - 1.
    """

    E1: TensorField
    E2: TensorField
    E3: RhoSeries
    order: int

    def checks(self) -> list[Check]:
        m = self.order
        e1 = first_nonzero_term(self.E1, m)
        e2 = first_nonzero_term(self.E2, m)
        e3 = next(((exponent, log_power, c) for (exponent, log_power), c in self.E3.items() if exponent < m - 1), None)
        return [
            Check(f"E1 = O(rho^{m})", e1 is None, e1),
            Check(f"E2 = O(rho^{m})", e2 is None, e2),
            Check(f"E3 = O(rho^{m - 1})", e3 is None, e3),
        ]

    def vanish(self) -> bool:
        return all(check.passed for check in self.checks())

    def trace_coefficient(self, g0: Metric, exponent):
        """tr_{g0} del coeficiente rho^exponent de E1 (condición de traza en dimensión par)."""
        from tensor.services import trace

        coefficient = TensorField.from_function(
            ("d", "d"), g0.n, lambda i, j: self.E1[i, j].coefficient(exponent)
        )
        return normal(trace(g0, coefficient))


@dataclass(frozen=True, eq=False)
class ObstructionTensor:
    """O canónico = parte sin traza del coeficiente rho^{n/2-1} de E1; value = normalization * O."""

    tensor: TensorField
    n: int
    normalization: sympy.Expr = sympy.Integer(1)
    checks: tuple = ()

    @property
    def value(self) -> TensorField:
        if self.normalization == 1:
            return self.tensor
        return self.tensor.scale(self.normalization).map(normal, name="O")

    def is_zero(self) -> bool:
        return self.tensor.is_zero()

    def renormalized(self, normalization) -> "ObstructionTensor":
        return ObstructionTensor(self.tensor, self.n, sympy.Rational(normalization), self.checks)


@dataclass(frozen=True, eq=False)
class NilpotentRicci:
    """Ric(g0 + h) = Ric(g0) + lineal + Q2 + Q3 + Q4."""

    ricci: TensorField
    base_ricci: TensorField
    linear: TensorField
    quadratic: dict
    checks: tuple = ()
    hypotheses: tuple = ()

    def vanishing(self) -> dict:
        return {order: term.is_zero() for order, term in self.quadratic.items()}
