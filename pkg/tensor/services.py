"""
Suite de curvatura sobre un marco (holónomo o no).

Convenciones:
- nabla_{e_i} e_j = Gamma^k_ij e_k, guardado como Gamma[k, i, j].
- R_ijk^l v_l = 2 nabla_[i nabla_j] v_k, guardado como R[i, j, k, l].
- R_ij = R_ikj^k; la derivada covariante agrega el índice nuevo en primer lugar.
Las componentes pueden ser expresiones de sympy o RhoSeries: todo se escribe
con +, * y Metric.apply.
"""
import itertools
import logging

import numpy as np
import sympy

from core.errors import DegenerateMetricError, DimensionError, RankMismatchError, TruncationError
from expr.models import RhoSeries
from expr.services import is_zero, normal
from tensor.models import Metric, TensorField

logger = logging.getLogger(__name__)

ZERO = sympy.Integer(0)
HALF = sympy.Rational(1, 2)
NEUMANN_MAX_TERMS = 64


def sum_terms(terms):
    total = ZERO
    for term in terms:
        if not is_zero(term):
            total = total + term
    return normal(total)


def product(*factors):
    if any(is_zero(factor) for factor in factors):
        return ZERO
    result = sympy.Integer(1)
    for factor in factors:
        result = result * factor
    return result


def _memo(g: Metric, key, compute):
    return g.memoized(key, compute)


def _has_series(g: Metric) -> bool:
    return any(getattr(entry, "is_series", False) for row in g.components for entry in row)


# ---------------------------------------------------------------------------
# Inversa
# ---------------------------------------------------------------------------
def _matmul(A, B):
    n = len(A)
    return [[sum_terms(product(A[i][k], B[k][j]) for k in range(n)) for j in range(n)] for i in range(n)]


def _exact_inverse(matrix: sympy.Matrix):
    det = normal(matrix.det(method="berkowitz"))
    if det == 0:
        raise DegenerateMetricError("Determinante idénticamente nulo", witness=det)
    adjugate = matrix.adjugate(method="berkowitz")
    return [[normal(adjugate[i, j] / det) for j in range(matrix.rows)] for i in range(matrix.rows)]


def _series_inverse(g: Metric):
    """Serie de Neumann sum_k (-g0^-1 h)^k g0^-1 con g0 = g|_{rho=0}."""
    n = g.n
    series = [
        [entry if getattr(entry, "is_series", False) else RhoSeries.constant(entry) for entry in row]
        for row in g.components
    ]
    g0 = sympy.Matrix(n, n, lambda i, j: series[i][j].coefficient(0))
    g0_inv = _exact_inverse(g0)
    h = [[series[i][j] - g0[i, j] for j in range(n)] for i in range(n)]
    step = [[sum_terms(-product(g0_inv[i][k], h[k][j]) for k in range(n)) for j in range(n)] for i in range(n)]
    term = [[RhoSeries.constant(g0_inv[i][j]) for j in range(n)] for i in range(n)]
    total = term
    for order in range(1, NEUMANN_MAX_TERMS):
        term = _matmul(step, term)
        nonzero = [entry for row in term for entry in row if not is_zero(entry)]
        if not nonzero:
            return total
        total = [[normal(total[i][j] + term[i][j]) for j in range(n)] for i in range(n)]
        limit = min(entry.truncation for row in total for entry in row if getattr(entry, "is_series", False))
        if min(entry.valuation() for entry in nonzero) >= limit:
            return total
        logger.debug("Inversa por serie de Neumann: término %s", order)
    raise TruncationError(
        "La inversa no es polinómica en rho: trunque la perturbación", witness=NEUMANN_MAX_TERMS
    )


def inverse_metric(g: Metric) -> TensorField:
    """g^{ij} exacta (adjunta/determinante) o como serie en rho."""

    def compute():
        if g.inverse is not None:
            rows = g.inverse
        elif _has_series(g):
            rows = _series_inverse(g)
        else:
            rows = _exact_inverse(g.matrix())
        return TensorField.from_matrix(rows, ("u", "u"), name="g^-1")

    return _memo(g, "inverse", compute)


# ---------------------------------------------------------------------------
# Conexión y curvatura
# ---------------------------------------------------------------------------
def christoffel(g: Metric) -> TensorField:
    """
    Gamma_lij = 1/2 (e_i g_jl + e_j g_il - e_l g_ij + r^m_ij g_ml - r^m_il g_mj - r^m_jl g_mi),
    Gamma^k_ij = g^{kl} Gamma_lij.
    """

    def compute():
        n = g.n
        ginv = inverse_metric(g).components
        r = g.structure_functions()
        dg = [[[g.apply(a, g.g(b, c)) for c in range(n)] for b in range(n)] for a in range(n)]

        def lower(l, i, j):
            terms = [dg[i][j][l], dg[j][i][l], -dg[l][i][j]]
            if r is not None:
                for m in range(n):
                    terms.extend([
                        product(r[m][i][j], g.g(m, l)),
                        -product(r[m][i][l], g.g(m, j)),
                        -product(r[m][j][l], g.g(m, i)),
                    ])
            return HALF * sum_terms(terms)

        lowered = [[[lower(l, i, j) for j in range(n)] for i in range(n)] for l in range(n)]
        symmetries = (("sym", (1, 2)),) if r is None else ()
        return TensorField.from_function(
            ("u", "d", "d"),
            n,
            lambda k, i, j: sum_terms(product(ginv[k, l], lowered[l][i][j]) for l in range(n)),
            name="Gamma",
            symmetries=symmetries,
        )

    return _memo(g, "christoffel", compute)


def _derived_christoffel(g: Metric):
    n = g.n
    gamma = christoffel(g).components
    dgamma = _memo(g, "dgamma", lambda: {
        (a, l, j, k): g.apply(a, gamma[l, j, k])
        for a, l, j, k in itertools.product(range(n), repeat=4)
    })
    return gamma, dgamma


def _riemann_component(g, gamma, dgamma, r, i, j, k, l):
    n = g.n
    terms = [dgamma[(i, l, j, k)], -dgamma[(j, l, i, k)]]
    for m in range(n):
        terms.append(product(gamma[m, j, k], gamma[l, i, m]))
        terms.append(-product(gamma[m, i, k], gamma[l, j, m]))
        if r is not None:
            terms.append(-product(r[m][i][j], gamma[l, m, k]))
    return -sum_terms(terms)


def riemann(g: Metric, lowered: bool = False) -> TensorField:
    """R_ijk^l (o R_ijkl con lowered=True)."""

    def compute():
        n = g.n
        gamma, dgamma = _derived_christoffel(g)
        r = g.structure_functions()
        tensor = TensorField.zeros(("d", "d", "d", "u"), n, "Riemann", (("anti", (0, 1)),))
        for i, j in itertools.combinations(range(n), 2):
            for k, l in itertools.product(range(n), repeat=2):
                value = _riemann_component(g, gamma, dgamma, r, i, j, k, l)
                tensor.components[i, j, k, l] = value
                tensor.components[j, i, k, l] = normal(-value)
        return tensor

    mixed = _memo(g, "riemann", compute)
    if not lowered:
        return mixed

    def lower():
        n = g.n
        return TensorField.from_function(
            ("d", "d", "d", "d"),
            n,
            lambda i, j, k, l: sum_terms(product(mixed[i, j, k, m], g.g(m, l)) for m in range(n)),
            name="Riemann",
            symmetries=(("anti", (0, 1)), ("anti", (2, 3))),
        )

    return _memo(g, "riemann_lowered", lower)


def ricci(g: Metric) -> TensorField:
    """R_ik = sum_j R_ijk^j, calculado sin armar el tensor de Riemann completo."""

    def compute():
        n = g.n
        gamma, dgamma = _derived_christoffel(g)
        r = g.structure_functions()
        tensor = TensorField.zeros(("d", "d"), n, "Ricci", (("sym", (0, 1)),))
        for i in range(n):
            for k in range(i, n):
                value = sum_terms(
                    _riemann_component(g, gamma, dgamma, r, i, j, k, j) for j in range(n) if j != i
                )
                tensor.components[i, k] = value
                tensor.components[k, i] = value
        logger.debug("Ricci calculado (n=%s, %s)", n, g.name or "sin nombre")
        return tensor

    return _memo(g, "ricci", compute)


def scalar(g: Metric):
    ginv = inverse_metric(g).components
    ric = ricci(g).components
    return sum_terms(product(ginv[i, k], ric[i, k]) for i in range(g.n) for k in range(g.n))


def _raise_both(g: Metric, T: TensorField) -> TensorField:
    ginv = inverse_metric(g).components
    n = g.n
    return TensorField.from_function(
        ("u", "u"),
        n,
        lambda k, l: sum_terms(
            product(ginv[k, a], ginv[l, b], T[a, b]) for a in range(n) for b in range(n)
        ),
    )


def schouten(g: Metric) -> TensorField:
    """P = (Ric - Scal g / (2(n-1))) / (n-2)."""
    n = g.n
    if n <= 2:
        raise DimensionError(f"Schouten requiere n > 2 (n = {n})")

    def compute():
        ric = ricci(g)
        s = scalar(g)
        factor = sympy.Rational(1, 2 * (n - 1))
        return TensorField.from_function(
            ("d", "d"),
            n,
            lambda i, j: sum_terms([ric[i, j], -product(factor, s, g.g(i, j))]) * sympy.Rational(1, n - 2),
            name="Schouten",
            symmetries=(("sym", (0, 1)),),
        )

    return _memo(g, "schouten", compute)


# ---------------------------------------------------------------------------
# Derivadas
# ---------------------------------------------------------------------------
def _as_tensor(T) -> TensorField:
    if isinstance(T, TensorField):
        return T
    components = np.empty((), dtype=object)
    components[()] = normal(T)
    return TensorField((), components, name="escalar")


def covariant_derivative(g: Metric, T) -> TensorField:
    """(nabla T)[i, a...] = nabla_i T_{a...}; el índice nuevo va primero."""
    T = _as_tensor(T)
    n = g.n
    gamma = christoffel(g).components
    signature = ("d",) + T.signature
    result = TensorField.zeros(signature, n, f"nabla {T.name}".strip())
    for i in range(n):
        for index in T.indices():
            terms = [g.apply(i, T.components[index])]
            for slot, kind in enumerate(T.signature):
                for m in range(n):
                    moved = index[:slot] + (m,) + index[slot + 1:]
                    value = T.components[moved]
                    if is_zero(value):
                        continue
                    if kind == "d":
                        terms.append(-product(gamma[m, i, index[slot]], value))
                    else:
                        terms.append(product(gamma[index[slot], i, m], value))
            result.components[(i,) + index] = sum_terms(terms)
    return result


def box(g: Metric, T) -> TensorField:
    """Laplaciano tensorial g^{ij} nabla_i nabla_j T."""
    T = _as_tensor(T)
    n = g.n
    ginv = inverse_metric(g).components
    second = covariant_derivative(g, covariant_derivative(g, T))

    def component(*index):
        return sum_terms(product(ginv[i, j], second[(i, j) + index]) for i in range(n) for j in range(n))

    if T.rank == 0:
        return _as_tensor(component())
    return TensorField.from_function(T.signature, n, component, name=f"box {T.name}".strip())


def divergence(g: Metric, T: TensorField) -> TensorField:
    """Contrae la derivada con el último índice de T."""
    if T.rank == 0:
        raise RankMismatchError("La divergencia requiere rango >= 1", witness=T.signature)
    n = g.n
    ginv = inverse_metric(g).components
    nabla = covariant_derivative(g, T)
    last = T.signature[-1]

    def component(*index):
        if last == "u":
            return sum_terms(nabla[(i,) + index + (i,)] for i in range(n))
        return sum_terms(
            product(ginv[i, j], nabla[(i,) + index + (j,)]) for i in range(n) for j in range(n)
        )

    return TensorField.from_function(T.signature[:-1], n, component, name=f"div {T.name}".strip())


def lie_derivative(g: Metric, X: TensorField, T: TensorField) -> TensorField:
    """(L_X T)_{a...} = X^k nabla_k T_{a...} + sum_s T_{..k..} nabla_{a_s} X^k (T covariante)."""
    if X.signature != ("u",):
        raise RankMismatchError("X debe ser un campo vectorial", witness=X.signature)
    if any(kind != "d" for kind in T.signature):
        raise RankMismatchError("La derivada de Lie se implementa para tensores covariantes", witness=T.signature)
    n = g.n
    nabla_T = covariant_derivative(g, T)
    nabla_X = covariant_derivative(g, X)

    def component(*index):
        terms = [product(X[k], nabla_T[(k,) + index]) for k in range(n)]
        for slot in range(T.rank):
            for k in range(n):
                moved = index[:slot] + (k,) + index[slot + 1:]
                terms.append(product(T[moved], nabla_X[index[slot], k]))
        return sum_terms(terms)

    return TensorField.from_function(T.signature, n, component, name=f"L_X {T.name}".strip())


# ---------------------------------------------------------------------------
# Tensores conformes
# ---------------------------------------------------------------------------
def cotton(g: Metric) -> TensorField:
    """A_ijk = nabla_j P_ki - nabla_k P_ji."""
    if g.n < 3:
        raise DimensionError(f"Cotton requiere n >= 3 (n = {g.n})")

    def compute():
        dP = covariant_derivative(g, schouten(g))
        return TensorField.from_function(
            ("d", "d", "d"),
            g.n,
            lambda i, j, k: sum_terms([dP[j, k, i], -dP[k, j, i]]),
            name="Cotton",
            symmetries=(("anti", (1, 2)),),
        )

    return _memo(g, "cotton", compute)


def weyl(g: Metric) -> TensorField:
    """W = R - (P_ik g_jl + P_jl g_ik - P_il g_jk - P_jk g_il)."""
    if g.n < 3:
        raise DimensionError(f"Weyl requiere n >= 3 (n = {g.n})")

    def compute():
        R = riemann(g, lowered=True)
        P = schouten(g)

        def component(i, j, k, l):
            return sum_terms([
                R[i, j, k, l],
                -product(P[i, k], g.g(j, l)),
                -product(P[j, l], g.g(i, k)),
                product(P[i, l], g.g(j, k)),
                product(P[j, k], g.g(i, l)),
            ])

        return TensorField.from_function(
            ("d", "d", "d", "d"),
            g.n,
            component,
            name="Weyl",
            symmetries=(("anti", (0, 1)), ("anti", (2, 3))),
        )

    return _memo(g, "weyl", compute)


def bach(g: Metric) -> TensorField:
    """B_ij = -g^{kl} nabla_l A_ijk - P^{kl} W_kijl."""
    if g.n < 3:
        raise DimensionError(f"Bach requiere n >= 3 (n = {g.n})")

    def compute():
        n = g.n
        ginv = inverse_metric(g).components
        dA = covariant_derivative(g, cotton(g))
        P_up = _raise_both(g, schouten(g))
        W = weyl(g)

        def component(i, j):
            terms = [
                -product(ginv[k, l], dA[l, i, j, k]) for k in range(n) for l in range(n)
            ]
            terms.extend(
                -product(P_up[k, l], W[k, i, j, l]) for k in range(n) for l in range(n)
            )
            return sum_terms(terms)

        return TensorField.from_function(
            ("d", "d"), n, component, name="Bach", symmetries=(("sym", (0, 1)),)
        )

    return _memo(g, "bach", compute)


def metric_tensor(g: Metric) -> TensorField:
    return TensorField.from_matrix(g.components, ("d", "d"), name="g")


def trace(g: Metric, T: TensorField):
    """g^{ij} T_ij."""
    ginv = inverse_metric(g).components
    return sum_terms(product(ginv[i, j], T[i, j]) for i in range(g.n) for j in range(g.n))
