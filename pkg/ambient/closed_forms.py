"""
Familias de métricas ambiente en forma cerrada.

- Operadores D± = 2 rho f'' + (2 ± n) f' - D f sobre series escalares y las
  soluciones F± = sum_k D^k F / (k! prod_{i<=k} (2i ± n)) rho^k.
- Ondas gpp: 2 dx^a dx^c̄ + H_āb̄ dx^ā dx^b̄ + G_AB dx^A dx^B con d_a H = 0.
- Grupos de Lie con métrica invariante a izquierda (producto semidirecto).
- Métricas de Einstein: g~ = 2 dt d(rho t) + t^2 (1 + Lambda rho / (2(n-1)))^2 g.
"""
import itertools
import logging
import math

import sympy

from core.errors import DimensionError, InputError, ObstructedError, PreconditionError
from core.models import Check
from expr.models import RhoSeries
from expr.services import is_zero, normal
from frame.models import FrameData
from frame.services import nrw_conditions
from tensor.models import Metric, TensorField, _as_symbol
from tensor.services import box, christoffel, inverse_metric, product, ricci, sum_terms

from ambient.constants import nrw_box_c, ppwave_log_c, ppwave_q, sol_denominator
from ambient.models import AmbientMetric, as_series

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Operadores en rho
# ---------------------------------------------------------------------------
def laplacian(G: Metric):
    """f -> Delta_G f (Laplaciano escalar en las coordenadas de G)."""

    def apply(f):
        return box(G, f).components[()]

    return apply


def flat_laplacian(coords, signature=None):
    """Delta de la métrica plana diag(signature) sobre coords."""
    signature = signature or [1] * len(coords)
    G = Metric.from_matrix(
        coords, [[signature[i] if i == j else 0 for j in range(len(coords))] for i in range(len(coords))]
    )
    return laplacian(G)


def _as_operator(D):
    return laplacian(D) if isinstance(D, Metric) else D


def d_operator(f, D, n, sign=-1) -> RhoSeries:
    """D±(f) = 2 rho f'' + (2 ± n) f' - D f, coeficiente a coeficiente."""
    D = _as_operator(D)
    f = as_series(f)
    first = f.diff_rho()
    second = first.diff_rho()
    return second.shift(1) * 2 + first * (2 + sign * n) - f.map(D)


def delta_minus(transverse, f, n) -> RhoSeries:
    """2 rho f'' + (2 - n) f' - Delta f."""
    return d_operator(f, transverse, n, sign=-1)


def delta_plus(transverse, f, n) -> RhoSeries:
    return d_operator(f, transverse, n, sign=1)


def operator_power(D, F, k):
    D = _as_operator(D)
    for _ in range(k):
        F = normal(D(F))
    return F


def series_solution(F, D, n, sign, truncation) -> RhoSeries:
    """
    F± truncada (exponentes < truncation).
    Con sign = -1 y n par se requiere D^{n/2} F = 0.
    """
    D = _as_operator(D)
    F = normal(sympy.sympify(F))
    if sign < 0 and n % 2 == 0:
        obstruction = operator_power(D, F, n // 2)
        if not is_zero(obstruction):
            raise PreconditionError(
                "F_- solo existe si n es impar o D^{n/2} F = 0",
                relation="D^{n/2} F = 0",
                witness=obstruction,
            )
    terms = {}
    current = F
    k = 1
    while k < truncation:
        current = normal(D(current))
        if is_zero(current):
            break
        terms[(k, 0)] = current / sol_denominator(k, n, sign)
        k += 1
    return RhoSeries.build(terms, truncation)


def homogeneous_branch(alpha, D, n, truncation) -> RhoSeries:
    """rho^{n/2} (alpha + alpha_+), anulada por D_-."""
    half = sympy.Rational(n, 2)
    if truncation <= half:
        return RhoSeries.zero(truncation)
    inner = RhoSeries.constant(alpha, truncation - half) + series_solution(alpha, D, n, 1, truncation - half)
    return inner.shift(half)


# ---------------------------------------------------------------------------
# Ondas gpp
# ---------------------------------------------------------------------------
def _split_coords(coords, n, p):
    coords = tuple(_as_symbol(c) for c in coords)
    if len(coords) != n:
        raise DimensionError(f"{len(coords)} coordenadas para dimensión {n}")
    return coords[:p], coords[p:n - p], coords[n - p:]


def gpp_wave_metric(coords, H, G, p, functions=None, name="") -> Metric:
    """
    Métrica en coordenadas (x^a | x^A | x^ā):
    g_{a c̄} = δ, g_{āb̄} = H_āb̄, g_AB = G_AB.
    """
    H = sympy.Matrix(H)
    G = sympy.Matrix(G) if len(G) else sympy.zeros(0, 0)
    n = 2 * p + G.rows
    if H.shape != (p, p) or H != H.T:
        raise InputError("H debe ser una matriz simétrica p×p")
    rows = [[sympy.Integer(0)] * n for _ in range(n)]
    for a in range(p):
        rows[a][n - p + a] = rows[n - p + a][a] = sympy.Integer(1)
    for a, b in itertools.product(range(p), repeat=2):
        rows[n - p + a][n - p + b] = H[a, b]
    for A, B in itertools.product(range(G.rows), repeat=2):
        rows[p + A][p + B] = G[A, B]
    return Metric.from_matrix(coords, rows, functions=functions, name=name or "onda gpp")


def gpp_wave_frame(coords, H, G, p, functions=None, name="") -> FrameData:
    """Marco e_a = d_a, e_B = d_B, e_c̄ = d_c̄ - 1/2 H_c̄b̄ d_b (G constante)."""
    H = sympy.Matrix(H)
    G = sympy.Matrix(G) if len(G) else sympy.zeros(0, 0)
    n = 2 * p + G.rows
    rows = [[sympy.Integer(0)] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = sympy.Integer(1)
    for c, b in itertools.product(range(p), repeat=2):
        rows[n - p + c][b] = -H[c, b] / 2
    gframe = [[0] * n for _ in range(n)]
    for a in range(p):
        gframe[a][n - p + a] = gframe[n - p + a][a] = 1
    for A, B in itertools.product(range(G.rows), repeat=2):
        gframe[p + A][p + B] = G[A, B]
    return FrameData.from_vector_fields(coords, rows, gframe, p, functions=functions, name=name or "onda gpp")


def _transverse(coords, G, p, functions=None):
    n = len(coords)
    _, middle, _ = _split_coords(coords, n, p)
    G = sympy.Matrix(G) if len(G) else sympy.zeros(0, 0)
    if G.rows == 0:
        return None
    return Metric.from_matrix(middle, G.tolist(), functions=functions, name="G")


def gpp_preconditions(coords, H, G, p, functions=None) -> list[Check]:
    """d_a H = 0 y Ric(G) = 0."""
    n = len(coords)
    null, _, _ = _split_coords(coords, n, p)
    H = sympy.Matrix(H)
    witness = None
    for a, (i, j) in itertools.product(null, itertools.product(range(p), repeat=2)):
        value = normal(sympy.diff(H[i, j], a))
        if not is_zero(value):
            witness = (str(a), i, j, value)
            break
    checks = [Check("d_a H = 0", witness is None, witness)]
    transverse = _transverse(coords, G, p, functions)
    if transverse is not None and transverse.n >= 2:
        items = ricci(transverse).nonzero_items()
        checks.append(Check("Ric(G) = 0", not items, items[0] if items else None))
    else:
        checks.append(Check("Ric(G) = 0", True))
    return checks


def _require(checks):
    for check in checks:
        if not check.passed:
            raise PreconditionError(
                f"Falla la hipótesis: {check.name}", relation=check.name, witness=check.witness
            )


def _transverse_operator(coords, G, p, functions=None):
    transverse = _transverse(coords, G, p, functions)
    if transverse is None:
        return lambda f: sympy.Integer(0)
    return laplacian(transverse)


def ppwave_obstruction_factor(n) -> sympy.Rational:
    """O_āb̄ = factor * Delta^{n/2} H_āb̄ (normalización canónica, g_āb̄ = H_āb̄)."""
    return -nrw_box_c(n) / 2


def ppwave_obstruction(coords, H, G, p, n=None, functions=None) -> sympy.Matrix:
    n = len(coords) if n is None else n
    if n % 2 or n < 4:
        raise DimensionError(f"La obstrucción está definida para n par >= 4 (n = {n})")
    D = _transverse_operator(coords, G, p, functions)
    factor = ppwave_obstruction_factor(n)
    H = sympy.Matrix(H)
    return H.applyfunc(lambda entry: normal(factor * operator_power(D, entry, n // 2)))


def ppwave_ambient(coords, H, G, p, alpha=None, q0=0, truncation=None, log_branch=None, functions=None, name="") -> AmbientMetric:
    """
    h_āb̄ = sum_k Delta^k H / (k! prod_{i<=k} (2i - n)) rho^k + rho^{n/2} (alpha + alpha_+).
    - n par con Delta^{n/2} H != 0: rama logarítmica (log_branch) o ObstructedError.
    - alpha: matriz p×p de funciones con d_a alpha = 0 (por defecto 0).
    """
    n = len(coords)
    _require(gpp_preconditions(coords, H, G, p, functions))
    H = sympy.Matrix(H)
    alpha = sympy.zeros(p, p) if alpha is None else sympy.Matrix(alpha)
    truncation = (2 * n + 1 if n % 2 else n + 1) if truncation is None else truncation
    D = _transverse_operator(coords, G, p, functions)
    base = gpp_wave_metric(coords, H, G, p, functions=functions)
    s = n // 2
    even = n % 2 == 0

    obstructed = False
    if even:
        top = H.applyfunc(lambda entry: operator_power(D, entry, s))
        obstructed = any(not is_zero(entry) for entry in top)
        if obstructed and not log_branch:
            raise ObstructedError(
                "Delta^{n/2} H != 0: no hay solución analítica en dimensión par",
                obstruction=ppwave_obstruction(coords, H, G, p, n, functions),
            )

    def component(a, b):
        entry = H[a, b]
        terms = {}
        current = entry
        k = 1
        while k < truncation and not (even and k >= s):
            current = normal(D(current))
            if is_zero(current):
                break
            terms[(k, 0)] = current / sol_denominator(k, n, -1)
            k += 1
        series = RhoSeries.build(terms, truncation)
        if even and obstructed:
            series = series + _log_branch(entry, D, n, q0, truncation)
        return series + homogeneous_branch(alpha[a, b], D, n, truncation)

    rows = [[RhoSeries.zero(truncation) for _ in range(n)] for _ in range(n)]
    for a, b in itertools.product(range(p), repeat=2):
        rows[n - p + a][n - p + b] = component(a, b)
    logger.info("Onda pp de dimensión %s: truncación %s, rama log=%s", n, truncation, obstructed)
    return AmbientMetric.build(
        base,
        rows,
        truncation=truncation,
        name=name or f"onda pp (n={n})",
        notes={"log_branch": obstructed, "q0": q0},
    )


def _log_branch(entry, D, n, q0, truncation) -> RhoSeries:
    """c_n rho^s sum_k (log rho - q_k) Delta^{s+k} H / (k! prod_{i<=k} (2i + n)) rho^k."""
    s = n // 2
    c = ppwave_log_c(n)
    current = operator_power(D, entry, s)
    terms = {}
    k = 0
    while s + k < truncation and not is_zero(current):
        coefficient = c * current / (math.factorial(k) * _rising(k, n))
        terms[(s + k, 1)] = coefficient
        terms[(s + k, 0)] = -ppwave_q(k, n, q0) * coefficient
        current = normal(D(current))
        k += 1
    return RhoSeries.build(terms, truncation)


def _rising(k, n):
    value = 1
    for i in range(1, k + 1):
        value *= 2 * i + n
    return value


# ---------------------------------------------------------------------------
# Grupos de Lie
# ---------------------------------------------------------------------------
def middle_laplacian(F: FrameData):
    """f -> g^{AB} nabla_A nabla_B f sobre el bloque medio del marco."""
    g0 = F.metric
    middle = list(F.middle_block)
    gamma = christoffel(g0)
    ginv = inverse_metric(g0)

    def apply(f):
        terms = []
        for A, B in itertools.product(middle, repeat=2):
            if is_zero(ginv[A, B]):
                continue
            second = g0.apply(A, g0.apply(B, f))
            first = sum_terms(product(gamma[k, A, B], g0.apply(k, f)) for k in range(g0.n))
            terms.append(product(ginv[A, B], sum_terms([second, -first])))
        return sum_terms(terms)

    return apply


def left_invariant_ambient(F: FrameData, F_funcs=None, truncation=None, name="") -> AmbientMetric:
    """
    h = 2 rho / (n - 2) Ric + rho^{n/2} (F + F_+) sobre el bloque Θ^ā Θ^c̄.
    - F_funcs: matriz p×p (funciones con e_a(F) = 0); D = g^{AB} nabla_A nabla_B sobre el bloque medio.
    """
    checks = nrw_conditions(F)
    _require(checks)
    n, p = F.n, F.p
    g0 = F.metric
    dual = list(F.dual_block)
    if F_funcs is not None:
        F_funcs = sympy.Matrix(F_funcs)
        witness = None
        for a, (i, j) in itertools.product(F.null_block, itertools.product(range(p), repeat=2)):
            value = F.apply(a, F_funcs[i, j])
            if not is_zero(value):
                witness = (a, i, j, value)
                break
        _require([Check("dF(e_a) = 0", witness is None, witness)])

    Ric = ricci(g0)
    factor = sympy.Rational(2, n - 2)
    if truncation is None:
        truncation = sympy.oo if F_funcs is None else 2 * n + 1

    D = middle_laplacian(F)
    rows = [[RhoSeries.monomial(factor * Ric[i, j], 1, truncation=truncation) for j in range(n)] for i in range(n)]
    if F_funcs is not None:
        for a, b in itertools.product(range(p), repeat=2):
            i, j = dual[a], dual[b]
            rows[i][j] = rows[i][j] + homogeneous_branch(F_funcs[a, b], D, n, truncation)
    logger.info("Métrica ambiente invariante a izquierda de %s", F.name or "g0")
    return AmbientMetric.build(g0, rows, truncation=truncation, name=name or f"ambiente de {F.name}".strip())


# ---------------------------------------------------------------------------
# Einstein
# ---------------------------------------------------------------------------
def einstein_factor(n, Lambda):
    """(1 + Lambda rho / (2(n-1)))^2 - 1 como serie exacta."""
    Lambda = sympy.Rational(Lambda)
    a = Lambda / (2 * (n - 1))
    return RhoSeries.build({(1, 0): 2 * a, (2, 0): a**2})


def einstein_ambient(g: Metric, Lambda, name="") -> AmbientMetric:
    n = g.n
    Lambda = sympy.Rational(Lambda)
    Ric = ricci(g)
    target = TensorField.from_function(("d", "d"), n, lambda i, j: Lambda * g.g(i, j))
    difference = Ric.difference(target)
    if difference is not None:
        raise PreconditionError(
            f"La métrica no es de Einstein con Lambda = {Lambda}", relation="Ric = Lambda g", witness=difference
        )
    factor = einstein_factor(n, Lambda)
    rows = [[factor * g.g(i, j) for j in range(n)] for i in range(n)]
    return AmbientMetric.build(g, rows, name=name or f"ambiente de Einstein de {g.name}".strip())
