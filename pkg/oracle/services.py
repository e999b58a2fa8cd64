"""
Oráculo numérico: curvatura por diferencias finitas centradas.

Las derivadas de la métrica se aproximan con diferencias centradas de
segundo orden (error O(h^2)) y Ricci se arma con
R_ij = d_k G^k_ij - d_i G^k_kj + G^m_ij G^k_km - G^m_kj G^k_im.
Los marcos anholónomos se pasan a coordenadas con el coframe
Θ = (E^-1)^T antes de evaluar.
"""
import logging

import numpy as np
import sympy
from sympy.core.function import AppliedUndef

from core.conf import get_fd_step, get_sample_points, get_seed, get_tolerance
from core.errors import OracleError
from core.models import Check
from expr.parser import parse
from expr.services import RHO, normal
from tensor.models import Metric, TensorField
from tensor.services import ricci

from oracle.models import OracleReport, SamplePoint

logger = logging.getLogger(__name__)

RATIO_BOUNDS = (3.0, 5.0)
RICHARDSON_RATIO_BOUNDS = (10.0, 22.0)
MAX_ATTEMPTS_PER_POINT = 100


# ---------------------------------------------------------------------------
# De lo simbólico a funciones numéricas
# ---------------------------------------------------------------------------
def _realize(e, bindings):
    """Sustituye cada átomo de función por su realización concreta."""
    e = sympy.sympify(e)
    replacements = {}
    for atom in e.atoms(AppliedUndef):
        name = atom.func.__name__
        if name not in bindings:
            raise OracleError(f"Átomo de función sin realizar: {atom}", witness=atom)
        value = bindings[name]
        if isinstance(value, str):
            value = parse(value, variables=[str(a) for a in atom.args])
        replacements[atom] = value
    if not replacements:
        return e
    return e.subs(replacements).doit()


def _coframe(g: Metric) -> sympy.Matrix:
    E = sympy.Matrix(g.frame)
    return E.inv(method="ADJ").T.applyfunc(normal)


def coordinate_metric(g: Metric) -> sympy.Matrix:
    """g_mu nu = Θ^i_mu Θ^j_nu g_ij; identidad para métricas en coordenadas."""
    if g.is_holonomic:
        return g.matrix()
    theta = _coframe(g)
    return (theta.T * g.matrix() * theta).applyfunc(normal)


def coordinate_tensor(g: Metric, T: TensorField) -> sympy.Matrix:
    if T.rank != 2 or tuple(T.signature) != ("d", "d"):
        raise OracleError(f"Solo tensores (0,2): firma {T.signature}")
    if g.is_holonomic:
        return T.matrix()
    theta = _coframe(g)
    return (theta.T * T.matrix() * theta).applyfunc(normal)


def matrix_callable(matrix: sympy.Matrix, coords, bindings=None):
    bindings = bindings or {}
    realized = matrix.applyfunc(lambda e: _realize(e, bindings))
    if realized.has(RHO):
        raise OracleError("El oráculo no evalúa series en rho")
    fn = sympy.lambdify(list(coords), realized, modules="numpy")

    def evaluate(x):
        return np.array(fn(*np.asarray(x, dtype=float)), dtype=float)

    return evaluate


def metric_callable(g: Metric, bindings=None):
    return matrix_callable(coordinate_metric(g), g.coords, bindings)


# ---------------------------------------------------------------------------
# Ricci numérico
# ---------------------------------------------------------------------------
def _metric_derivatives(metric_fn, x, h, richardson=False):
    """
    (g, dg[c,a,b] = d_c g_ab, d2g[m,c,a,b] = d_m d_c g_ab) por diferencias centrales.
    - richardson: combina los pasos h y h/2 como (4 D(h/2) - D(h)) / 3; error O(h^4).
    """
    if richardson:
        g, dg_coarse, d2g_coarse = _metric_derivatives(metric_fn, x, h)
        _, dg_fine, d2g_fine = _metric_derivatives(metric_fn, x, h / 2)
        return g, (4 * dg_fine - dg_coarse) / 3, (4 * d2g_fine - d2g_coarse) / 3
    n = len(x)
    basis = np.eye(n) * h
    g = metric_fn(x)
    plus = [metric_fn(x + basis[c]) for c in range(n)]
    minus = [metric_fn(x - basis[c]) for c in range(n)]

    dg = np.array([(plus[c] - minus[c]) / (2 * h) for c in range(n)])
    d2g = np.zeros((n, n, n, n))
    for c in range(n):
        d2g[c, c] = (plus[c] - 2 * g + minus[c]) / h**2
        for d in range(c + 1, n):
            value = (
                metric_fn(x + basis[c] + basis[d])
                - metric_fn(x + basis[c] - basis[d])
                - metric_fn(x - basis[c] + basis[d])
                + metric_fn(x - basis[c] - basis[d])
            ) / (4 * h**2)
            d2g[c, d] = value
            d2g[d, c] = value
    return g, dg, d2g


def numeric_ricci(metric_fn, point: SamplePoint, richardson=False) -> np.ndarray:
    """Ricci en el punto con error O(h^2) (O(h^4) con richardson); OracleError si det g ~ 0."""
    x = point.array
    g, dg, d2g = _metric_derivatives(metric_fn, x, point.step, richardson)
    SamplePoint.require_nondegenerate(g, point.coords)
    ginv = np.linalg.inv(g)

    # G_l,ij = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
    lowered = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
    d_lowered = 0.5 * (np.einsum("milj->mlij", d2g) + np.einsum("mjli->mlij", d2g) - d2g)
    dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)

    gamma = np.einsum("kl,lij->kij", ginv, lowered)
    dgamma = np.einsum("mkl,lij->mkij", dginv, lowered) + np.einsum("kl,mlij->mkij", ginv, d_lowered)

    R = (
        np.einsum("kkij->ij", dgamma)
        - np.einsum("ikkj->ij", dgamma)
        + np.einsum("mij,kkm->ij", gamma, gamma)
        - np.einsum("mkj,kim->ij", gamma, gamma)
    )
    return 0.5 * (R + R.T)


# ---------------------------------------------------------------------------
# Muestreo y comparación
# ---------------------------------------------------------------------------
def sample_points(g: Metric, count=None, seed=None, bounds=None, step=None, bindings=None) -> list[SamplePoint]:
    """
    Puntos uniformes en [-1, 1] por coordenada (o `bounds` = {nombre: (a, b)})
    con rechazo de |det g| <= 1e-8; la semilla fija el resultado.
    """
    count = get_sample_points() if count is None else count
    seed = get_seed() if seed is None else seed
    step = get_fd_step() if step is None else step
    bounds = bounds or {}
    bindings = dict(bindings or {})
    metric_fn = metric_callable(g, bindings)
    limits = np.array([bounds.get(str(c), (-1.0, 1.0)) for c in g.coords], dtype=float)

    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count * MAX_ATTEMPTS_PER_POINT):
        if len(points) == count:
            break
        x = rng.uniform(limits[:, 0], limits[:, 1])
        try:
            SamplePoint.require_nondegenerate(metric_fn(x), tuple(x))
        except OracleError:
            logger.debug("Punto rechazado: %s", x)
            continue
        points.append(SamplePoint(tuple(float(v) for v in x), step, bindings))
    if len(points) < count:
        raise OracleError(f"Solo {len(points)} de {count} puntos no degenerados", witness=len(points))
    return points


def _discrepancy(symbolic_value: np.ndarray, numeric_value: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(symbolic_value))))
    return float(np.max(np.abs(numeric_value - symbolic_value))) / scale


def compare(symbolic, numeric, points, coords=None, tolerance=None) -> OracleReport:
    """
    Discrepancia relativa máxima max|num - sim| / max(1, max|sim|).
    - symbolic: TensorField (0,2) en coordenadas (requiere coords) o función del punto.
    - numeric: función SamplePoint -> matriz.
    """
    tolerance = get_tolerance() if tolerance is None else tolerance
    if isinstance(symbolic, TensorField):
        if coords is None:
            raise OracleError("Falta la lista de coordenadas para evaluar el tensor")
        bindings = points[0].bindings if points else {}
        evaluate = matrix_callable(symbolic.matrix(), coords, bindings)
        symbolic = lambda point: evaluate(point.array)  # noqa: E731

    worst = 0.0
    witness = None
    for point in points:
        value = _discrepancy(symbolic(point), numeric(point))
        if witness is None or value > worst:
            worst, witness = value, point.coords
    report = OracleReport(worst, tolerance, len(points), witness)
    logger.info("Oráculo: %s", report)
    return report


def _ricci_callables(g: Metric, bindings):
    metric_fn = metric_callable(g, bindings)
    symbolic_fn = matrix_callable(coordinate_tensor(g, ricci(g)), g.coords, bindings)
    return metric_fn, symbolic_fn


def verify_ricci(
    g: Metric, count=None, bindings=None, bounds=None, tolerance=None, step=None, richardson=False
) -> OracleReport:
    """Ricci simbólico contra diferencias finitas en puntos sembrados."""
    bindings = dict(bindings or {})
    points = sample_points(g, count=count, bounds=bounds, step=step, bindings=bindings)
    metric_fn, symbolic_fn = _ricci_callables(g, bindings)
    return compare(
        lambda point: symbolic_fn(point.array),
        lambda point: numeric_ricci(metric_fn, point, richardson),
        points,
        tolerance=tolerance,
    )


def convergence_ratio(g: Metric, point: SamplePoint, richardson=False) -> float:
    """discrepancia(h) / discrepancia(h/2) para el Ricci de g: ~4, o ~16 con richardson."""
    metric_fn, symbolic_fn = _ricci_callables(g, point.bindings)
    expected = symbolic_fn(point.array)
    coarse = _discrepancy(expected, numeric_ricci(metric_fn, point, richardson))
    fine = _discrepancy(expected, numeric_ricci(metric_fn, point.with_step(point.step / 2), richardson))
    if fine == 0.0:
        raise OracleError("Discrepancia nula con h/2: el cociente no está definido", witness=coarse)
    return coarse / fine


def convergence_check(g: Metric, point: SamplePoint, richardson=False) -> Check:
    ratio = convergence_ratio(g, point, richardson)
    low, high = RICHARDSON_RATIO_BOUNDS if richardson else RATIO_BOUNDS
    return Check(f"cociente al dividir h en {low:g}..{high:g}", low <= ratio <= high, ratio)
