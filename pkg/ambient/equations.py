"""
Ecuaciones de Fefferman-Graham para g(rho) = g0 + h(rho):

E1_ij = rho g''_ij - rho g^{kl} g'_ik g'_jl + 1/2 rho g^{kl} g'_kl g'_ij
        - (n/2 - 1) g'_ij - 1/2 g^{kl} g'_kl g_ij + Ric(g(rho))_ij
E2_i  = 1/2 g^{kl} (nabla_k g'_il - nabla_i g'_kl)
E3    = -1/2 g^{kl} g''_kl + 1/4 g^{kl} g^{pq} g'_kp g'_lq

Son los bloques (ij), (i rho) y (rho rho) de Ric de la métrica ambiente.
"""
import itertools
import logging

import sympy

from core.errors import InputError, RhoDependenceError, TruncationError
from expr.models import RhoSeries
from expr.services import RHO, normal, rho_coefficients, taylor_coefficients
from tensor.models import TensorField
from tensor.services import (
    HALF,
    covariant_derivative,
    inverse_metric,
    product,
    ricci,
    sum_terms,
)

from ambient.models import AmbientMetric, FGResiduals, truncate_tensor

logger = logging.getLogger(__name__)

QUARTER = sympy.Rational(1, 4)


def _rho_times(value):
    if getattr(value, "is_series", False):
        return value.shift(1)
    return normal(RHO * value)


def fg_residuals(ambient: AmbientMetric, m: int) -> FGResiduals:
    """Residuos exactos: E1, E2 para exponentes < m y E3 para exponentes < m - 1."""
    if m < 1:
        raise InputError(f"Orden inválido m={m}")
    if ambient.truncation < m + 1:
        raise TruncationError(
            f"h conocida hasta rho^{ambient.truncation}: se requiere truncación >= {m + 1}",
            witness=ambient.truncation,
        )
    n = ambient.n
    g = ambient.g_rho(truncation=m + 1)
    h = truncate_tensor(ambient.h, m + 1)
    ginv = inverse_metric(g).components
    g1 = h.map(lambda c: c.diff_rho(), name="g'")
    g2 = g1.map(lambda c: c.diff_rho(), name="g''")
    Ric = ricci(g)
    logger.debug("Residuos FG de %s hasta rho^%s", g.name or "g", m)

    trace1 = sum_terms(product(ginv[k, l], g1[k, l]) for k in range(n) for l in range(n))
    trace2 = sum_terms(product(ginv[k, l], g2[k, l]) for k in range(n) for l in range(n))
    shape = sympy.Rational(n, 2) - 1

    def e1(i, j):
        quadratic = sum_terms(
            product(ginv[k, l], g1[i, k], g1[j, l]) for k in range(n) for l in range(n)
        )
        terms = [
            _rho_times(g2[i, j]),
            -_rho_times(quadratic),
            HALF * _rho_times(product(trace1, g1[i, j])),
            -shape * g1[i, j],
            -HALF * product(trace1, g.g(i, j)),
            Ric[i, j],
        ]
        return sum_terms(terms)

    E1 = TensorField.from_function(("d", "d"), n, e1, name="E1")

    nabla = covariant_derivative(g, g1)
    E2 = TensorField.from_function(
        ("d",),
        n,
        lambda i: HALF * sum_terms(
            product(ginv[k, l], sum_terms([nabla[k, i, l], -nabla[i, k, l]]))
            for k in range(n)
            for l in range(n)
        ),
        name="E2",
    )

    square = sum_terms(
        product(ginv[k, l], ginv[p, q], g1[k, p], g1[l, q])
        for k, l, p, q in itertools.product(range(n), repeat=4)
    )
    E3 = sum_terms([-HALF * trace2, QUARTER * square])
    if not getattr(E3, "is_series", False):
        E3 = RhoSeries.constant(E3)
    return FGResiduals(
        E1=truncate_tensor(E1, m),
        E2=truncate_tensor(E2, m),
        E3=E3.truncated(m - 1),
        order=m,
    )


def _expand_in_rho(value, order):
    """Serie en rho de una componente del Ricci ambiente (racional en rho)."""
    value = normal(value)
    try:
        return rho_coefficients(value, order - HALF)
    except RhoDependenceError:
        pass
    coefficients = taylor_coefficients(value, order - 1)
    return RhoSeries.build({(k, 0): c for k, c in enumerate(coefficients)}, order)


def ambient_ricci_direct(ambient: AmbientMetric, order: int | None = None) -> TensorField:
    """
    Ric de la métrica (n+2)-dimensional calculado directamente en (t, x^i, rho).
    - order=None: componentes exactas (expresiones).
    - order=m: cada componente como RhoSeries con exponentes < m.
    """
    if ambient.has_logs() or any(exponent.q != 1 for exponent in ambient.exponents()):
        raise InputError("El cálculo directo requiere h polinómica en rho")
    if not ambient.is_exact:
        if order is None:
            raise TruncationError("El Ricci exacto requiere h exacta", witness=ambient.truncation)
        # la parte conocida de h se toma como polinomio
        ambient = AmbientMetric.build(
            ambient.base,
            [[ambient.h[i, j].to_expr() for j in range(ambient.n)] for i in range(ambient.n)],
            name=ambient.name,
        )
    full = ambient.full_metric()
    Ric = ricci(full)
    logger.debug("Ricci ambiente directo de %s (dimensión %s)", full.name, full.n)
    if order is None:
        return Ric
    return Ric.map(lambda c: _expand_in_rho(c, order), name="Ricci ambiente")


def residual_blocks(ric: TensorField, n: int):
    """(E1, E2, E3) extraídos del Ricci ambiente en el orden (t, x^i, rho)."""
    last = n + 1
    E1 = TensorField.from_function(("d", "d"), n, lambda i, j: ric[1 + i, 1 + j], name="E1")
    E2 = TensorField.from_function(("d",), n, lambda i: ric[1 + i, last], name="E2")
    return E1, E2, ric[last, last]


def compare_residuals(residuals: FGResiduals, ric: TensorField):
    """Primera discrepancia entre los residuos y el Ricci ambiente (None si coinciden)."""
    m = residuals.order
    n = residuals.E1.n
    E1, E2, E3 = residual_blocks(ric, n)
    for label, ours, theirs, limit in (
        ("E1", residuals.E1, truncate_tensor(E1, m), m),
        ("E2", residuals.E2, truncate_tensor(E2, m), m),
    ):
        for index in ours.indices():
            delta = normal(ours[index] - theirs[index].truncated(limit))
            if not delta.is_zero_series():
                return label, index, delta
    E3 = E3 if getattr(E3, "is_series", False) else RhoSeries.constant(E3)
    delta = residuals.E3 - E3.truncated(m - 1)
    if not delta.is_zero_series():
        return "E3", (), delta
    for k in range(n + 2):
        for j in range(n + 2):
            if k == 0 or j == 0:
                value = ric[k, j]
                if getattr(value, "is_series", False) and not value.is_zero_series():
                    return "t", (k, j), value
    return None
