"""
Solución orden a orden de las ecuaciones de Fefferman-Graham.

El coeficiente rho^{k-1} de E1 depende de g^(k) solo a través de
k(k - n/2) g^(k) - 1/2 k tr(g^(k)) g0. Primero se fija la traza (por la traza
de E1, o por E3 cuando k = n) y después la parte sin traza.
"""
import logging

import sympy

from core.errors import DimensionError, InputError, ObstructedError, PreconditionError
from core.models import Check
from expr.models import RhoSeries
from expr.services import is_zero, normal
from frame.walker import nrw_coordinate_checks, parallel_null_check
from tensor.models import Metric, TensorField
from tensor.relative import sharp
from tensor.services import (
    bach,
    box,
    divergence,
    ricci,
    schouten,
    sum_terms,
    trace,
)

from ambient.constants import BACH_RATIO_N4, nrw_box_c, obstruction_norm
from ambient.equations import fg_residuals
from ambient.models import AmbientMetric, ObstructionTensor

logger = logging.getLogger(__name__)


def default_order(n: int) -> int:
    return 2 * n if n % 2 else n // 2 - 1


def ambient_from_coefficients(g0: Metric, coefficients, truncation=None, name="") -> AmbientMetric:
    """h = sum_k coefficients[k-1] rho^k; por defecto truncación len + 1."""
    n = g0.n
    truncation = len(coefficients) + 1 if truncation is None else truncation
    rows = [
        [
            RhoSeries.build(
                {(k, 0): coefficient[i, j] for k, coefficient in enumerate(coefficients, start=1)},
                truncation,
            )
            for j in range(n)
        ]
        for i in range(n)
    ]
    return AmbientMetric.build(g0, rows, truncation=truncation, name=name)


def trace_free(g0: Metric, T: TensorField) -> TensorField:
    n = g0.n
    t = trace(g0, T)
    return TensorField.from_function(
        ("d", "d"), n, lambda i, j: T[i, j] - t * g0.g(i, j) / n, name=T.name
    )


def _order_data(g0: Metric, coefficients, k):
    """(C, tr C, D): coeficientes rho^{k-1} de E1 y rho^{k-2} de E3 con g^(k) = 0."""
    ambient = ambient_from_coefficients(g0, coefficients, truncation=k + 1)
    residuals = fg_residuals(ambient, k)
    C = TensorField.from_function(
        ("d", "d"), g0.n, lambda i, j: residuals.E1[i, j].coefficient(k - 1), name=f"C{k}"
    )
    D = residuals.E3.coefficient(k - 2) if k >= 2 else sympy.Integer(0)
    return C, normal(trace(g0, C)), D


def _obstruction_from(g0: Metric, C: TensorField, normalization=None) -> ObstructionTensor:
    n = g0.n
    O = trace_free(g0, C)
    O = TensorField.from_function(("d", "d"), n, lambda i, j: O[i, j], name="O", symmetries=(("sym", (0, 1)),))
    t = normal(trace(g0, O))
    div = divergence(g0, O)
    checks = [
        Check("tr O = 0", is_zero(t), t),
        Check("div O = 0", div.is_zero(), None if div.is_zero() else div.nonzero_items()[0]),
    ]
    if n == 4:
        difference = bach(g0).difference(O.scale(BACH_RATIO_N4))
        checks.append(Check(f"B = {BACH_RATIO_N4} O", difference is None, difference))
    if normalization is None:
        normalization = obstruction_norm()
    return ObstructionTensor(O, n, sympy.Rational(normalization), tuple(checks))


def expand_generic(g0: Metric, m: int | None = None, even_choice=None) -> AmbientMetric:
    """
    Coeficientes g^(1), ..., g^(m) (coeficientes de Taylor simples) de g(rho).
    - n par: m <= n/2 - 1 salvo que even_choice (tensor o matriz) fije la parte
      sin traza de g^(n/2); si la obstrucción no se anula se lanza ObstructedError.
    """
    n = g0.n
    if n < 3:
        raise DimensionError(f"La expansión requiere n >= 3 (n = {n})")
    m = default_order(n) if m is None else m
    if m < 1:
        raise InputError(f"Orden inválido m={m}")
    even = n % 2 == 0
    s = n // 2
    coefficients = []
    for k in range(1, m + 1):
        C, trC, D = _order_data(g0, coefficients, k)
        if k == n:
            t = normal(2 * D / (k * (k - 1)))
        else:
            # k(k - n) t + tr C = 0
            t = normal(-trC / (k * (k - n)))
        C_tf = trace_free(g0, C)
        if even and k == s:
            obstruction = _obstruction_from(g0, C)
            if not obstruction.is_zero():
                raise ObstructedError(
                    f"Obstrucción no nula en el orden n/2 = {s}", obstruction=obstruction
                )
            if even_choice is None:
                raise ObstructedError(
                    f"Barrera de orden par: g^({s}) requiere una elección sin traza", obstruction=obstruction
                )
            choice = even_choice if isinstance(even_choice, TensorField) else TensorField.from_matrix(even_choice)
            X_tf = trace_free(g0, choice)
        else:
            X_tf = C_tf.scale(sympy.Rational(-1, k) / (k - sympy.Rational(n, 2)))
        X = TensorField.from_function(
            ("d", "d"), n, lambda i, j: X_tf[i, j] + t * g0.g(i, j) / n, name=f"g^({k})"
        )
        coefficients.append(X)
        logger.debug("Expansión de %s: orden %s resuelto", g0.name or "g0", k)
    logger.info("Expansión de %s hasta rho^%s", g0.name or "g0", m)
    return ambient_from_coefficients(g0, coefficients, name=f"expansión de {g0.name}".strip())


def obstruction(g0: Metric, normalization=None) -> ObstructionTensor:
    """O canónico = (rho^{1-n/2} Ric(g~)|_{TM x TM})|_{rho=0}, solo n par >= 4."""
    n = g0.n
    if n % 2 or n < 4:
        raise DimensionError(f"La obstrucción está definida para n par >= 4 (n = {n})")
    s = n // 2
    lower = expand_generic(g0, s - 1)
    coefficients = [lower.coefficient(k) for k in range(1, s)]
    C, _, _ = _order_data(g0, coefficients, s)
    result = _obstruction_from(g0, C, normalization)
    logger.info("Obstrucción de %s: %s", g0.name or "g0", [str(c) for c in result.checks])
    return result


# ---------------------------------------------------------------------------
# Caso Walker nulo-Ricci
# ---------------------------------------------------------------------------
def nrw_linear_coefficients(g0: Metric, order: int) -> AmbientMetric:
    """
    Recursión lineal (con m = n/2 - 1 y coeficientes g^(k)/k!):
    m g^(1) = Ric, 2(k - m) g^(k+1) = Box g^(k).
    Devuelve los coeficientes de Taylor simples a_k = g^(k)/k!.
    """
    n = g0.n
    half = sympy.Rational(n, 2)
    if n % 2 == 0 and order >= half:
        raise InputError(f"La recursión lineal llega hasta el orden {half - 1} en dimensión par")
    m = half - 1
    current = ricci(g0).scale(1 / m)
    coefficients = [current]
    for k in range(1, order):
        nxt = box(g0, current)
        current = nxt.scale(sympy.Rational(1, (k + 1) * 2) / (k - m))
        coefficients.append(current)
    return ambient_from_coefficients(g0, coefficients, name=f"NRW lineal de {g0.name}".strip())


def box_power(g0: Metric, T: TensorField, power: int) -> TensorField:
    for _ in range(power):
        T = box(g0, T)
    return T


def nrw_obstruction(g0: Metric) -> TensorField:
    """nrw_box_c(n) Box^{n/2-1} Ric (normalización canónica)."""
    n = g0.n
    return box_power(g0, ricci(g0), n // 2 - 1).scale(nrw_box_c(n))


def _image_in(g0: Metric, T: TensorField, null_indices):
    """Primera componente de T# fuera de N (None si Im T# está en N)."""
    Ts = sharp(g0, T)
    for i in range(g0.n):
        if i in null_indices:
            continue
        for j in range(g0.n):
            if not is_zero(Ts[i][j]):
                return (i, j, Ts[i][j])
    return None


def nrw_coefficient_audit(g0: Metric, ambient: AmbientMetric, m: int, null_indices, with_obstruction=True) -> list[Check]:
    """
    Para g0 Walker nulo-Ricci con N = span(e_a), a en null_indices:
    cada g^(k) (k <= m) tiene imagen en N y divergencia nula; en dimensión
    par, Im(O) en N.
    Si g0 no es Walker nulo-Ricci para N, PreconditionError.
    """
    null_indices = list(null_indices)
    checks = [parallel_null_check(g0, null_indices), *nrw_coordinate_checks(g0, null_indices)]
    for check in checks:
        if not check.passed:
            raise PreconditionError(
                f"g0 no es Walker nulo-Ricci: falla {check.name}", relation=check.name, witness=check.witness
            )
    known = ambient.truncation - 1 if ambient.truncation != sympy.oo else m
    for k in range(1, min(m, int(known)) + 1):
        coefficient = ambient.coefficient(k)
        witness = _image_in(g0, coefficient, null_indices)
        checks.append(Check(f"Im g^({k}) ⊂ N", witness is None, witness))
        div = divergence(g0, coefficient)
        checks.append(
            Check(f"div g^({k}) = 0", div.is_zero(), None if div.is_zero() else div.nonzero_items()[0])
        )
    if with_obstruction and g0.n % 2 == 0 and g0.n >= 4:
        O = obstruction(g0)
        witness = _image_in(g0, O.tensor, null_indices)
        checks.append(Check("Im O ⊂ N", witness is None, witness))
    logger.debug("Auditoría de %s: %s", g0.name or "g0", [str(c) for c in checks])
    return checks


def first_order_check(g0: Metric, ambient: AmbientMetric) -> Check:
    """g^(1) = 2 P."""
    P = schouten(g0)
    difference = ambient.coefficient(1).difference(P.scale(2))
    return Check("g^(1) = 2P", difference is None, difference)


def mu_relation(g0: Metric, ambient: AmbientMetric) -> Check:
    """(4 - n) mu = B + (4 - n) P_i^k P_kj con mu = g^(2)."""
    n = g0.n
    P = schouten(g0)
    Ps = sharp(g0, P)
    B = bach(g0)
    mu = ambient.coefficient(2)

    def delta(i, j):
        square = sum_terms(P[i, k] * Ps[k][j] for k in range(n))
        return normal((4 - n) * mu[i, j] - B[i, j] - (4 - n) * square)

    residual = TensorField.from_function(("d", "d"), n, delta)
    items = residual.nonzero_items()
    return Check("(4-n) mu = B + (4-n) P^2", not items, items[0] if items else None)
