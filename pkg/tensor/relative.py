"""
Fórmulas relativas entre dos métricas g = g0 + delta sobre el mismo marco.

- connection_difference: C^k_ij = 1/2 g^{kl}(nabla0_l g_ij - nabla0_i g_jl - nabla0_j g_il),
  es decir C = Gamma(g0) - Gamma(g) y nabla = nabla0 - C.
- relative_ricci: R_ij = R0_ij + nabla0_i C^k_kj - nabla0_k C^k_ij + C^p_ij C^k_kp - C^p_jk C^k_ip.
- nilpotency_report: traza nula, (h#)^2 = 0 e imagen totalmente nula.
"""
import logging

from core.errors import DimensionError
from core.models import Check
from expr.services import is_zero, normal
from tensor.models import Metric, TensorField
from tensor.services import (
    HALF,
    covariant_derivative,
    inverse_metric,
    metric_tensor,
    product,
    ricci,
    scalar,
    schouten,
    sum_terms,
)

logger = logging.getLogger(__name__)


def _same_frame(g: Metric, g0: Metric):
    if g.n != g0.n or tuple(g.coords) != tuple(g0.coords):
        raise DimensionError("Las métricas no comparten dimensión ni coordenadas")


def connection_difference(g: Metric, g0: Metric) -> TensorField:
    _same_frame(g, g0)
    n = g.n
    ginv = inverse_metric(g).components
    D = covariant_derivative(g0, metric_tensor(g))
    lowered = [
        [[sum_terms([D[l, i, j], -D[i, j, l], -D[j, i, l]]) for j in range(n)] for i in range(n)]
        for l in range(n)
    ]
    return TensorField.from_function(
        ("u", "d", "d"),
        n,
        lambda k, i, j: sum_terms(product(ginv[k, l], lowered[l][i][j]) for l in range(n)) * HALF,
        name="C",
        symmetries=(("sym", (1, 2)),),
    )


def relative_ricci(g0: Metric, C: TensorField, base_ricci: TensorField | None = None) -> TensorField:
    n = g0.n
    R0 = base_ricci if base_ricci is not None else ricci(g0)
    DC = covariant_derivative(g0, C)
    trace_C = [sum_terms(C[k, k, p] for k in range(n)) for p in range(n)]

    def component(i, j):
        terms = [R0[i, j]]
        terms.extend(DC[i, k, k, j] for k in range(n))
        terms.extend(-DC[k, k, i, j] for k in range(n))
        terms.extend(product(C[p, i, j], trace_C[p]) for p in range(n))
        terms.extend(-product(C[p, j, k], C[k, i, p]) for p in range(n) for k in range(n))
        return sum_terms(terms)

    return TensorField.from_function(("d", "d"), n, component, name="Ricci relativo")


def sharp(g0: Metric, h: TensorField):
    """h#^i_j = g0^{ik} h_kj como lista de listas."""
    n = g0.n
    ginv = inverse_metric(g0).components
    return [[sum_terms(product(ginv[i, k], h[k, j]) for k in range(n)) for j in range(n)] for i in range(n)]


def _first_nonzero(matrix):
    for i, row in enumerate(matrix):
        for j, value in enumerate(row):
            if not is_zero(value):
                return (i, j), value
    return None


def nilpotency_report(g0: Metric, h: TensorField, ricci_input: bool = False) -> list[Check]:
    """
    Verificaciones algebraicas de nilpotencia de h respecto de g0.
    - traza nula, (h#)^2 = 0, imagen de h# totalmente nula.
    - ricci_input=True: además P^2 = 0, imagen de P nula y curvatura escalar nula.
    """
    n = g0.n
    hs = sharp(g0, h)
    trace = sum_terms(hs[i][i] for i in range(n))
    square = [[sum_terms(product(hs[i][k], hs[k][j]) for k in range(n)) for j in range(n)] for i in range(n)]
    image = [
        [sum_terms(product(g0.g(a, b), hs[a][i], hs[b][j]) for a in range(n) for b in range(n)) for j in range(n)]
        for i in range(n)
    ]
    label = h.name or "h"
    checks = [
        Check(f"{label}: traza nula", is_zero(trace), trace),
        Check(f"{label}: (h#)^2 = 0", _first_nonzero(square) is None, _first_nonzero(square)),
        Check(f"{label}: imagen totalmente nula", _first_nonzero(image) is None, _first_nonzero(image)),
    ]
    if ricci_input:
        P = schouten(g0)
        Ps = sharp(g0, P)
        P_square = [[sum_terms(product(Ps[i][k], Ps[k][j]) for k in range(n)) for j in range(n)] for i in range(n)]
        P_image = [
            [sum_terms(product(g0.g(a, b), Ps[a][i], Ps[b][j]) for a in range(n) for b in range(n)) for j in range(n)]
            for i in range(n)
        ]
        s = normal(scalar(g0))
        checks.extend([
            Check("P^2 = 0", _first_nonzero(P_square) is None, _first_nonzero(P_square)),
            Check("imagen de P totalmente nula", _first_nonzero(P_image) is None, _first_nonzero(P_image)),
            Check("curvatura escalar nula", is_zero(s), s),
        ])
    logger.debug("Reporte de nilpotencia: %s", [str(check) for check in checks])
    return checks
