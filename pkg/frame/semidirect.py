"""
Álgebras h ⋉_φ k y sus realizaciones.

- build_semidirect: valida las identidades y devuelve el FrameData abstracto.
- realize_nilpotent: campos invariantes a izquierda en coordenadas
  exponenciales de segunda especie (g = exp(x_1 X_1) ... exp(x_n X_n)).
"""
import itertools
import logging

import sympy

from core.errors import AlgebraIdentityError, InputError, PreconditionError
from expr.services import normal, symbol
from frame.models import FrameData, SemidirectAlgebra

logger = logging.getLogger(__name__)

DERIVATION_IDENTITY = "r_{AB}^e r_{e c̄}^d = -2 r_{c̄[A}^C r_{B]C}^d"
HOMOMORPHISM_IDENTITY = "r_{āb̄}^c̄ r_{i c̄}^k = 2 r_{i[ā}^j r_{b̄]j}^k"
TWO_STEP_IDENTITY = "[k, k] en z y z central en k"
JACOBI_IDENTITY = "Jacobi"


def _bracket(r, n, x, y):
    """[x, y] para vectores de coordenadas x, y."""
    return [
        sum(r[k][i][j] * x[i] * y[j] for i in range(n) for j in range(n) if x[i] and y[j])
        for k in range(n)
    ]


def _unit(n, i):
    return [sympy.Integer(1) if k == i else sympy.Integer(0) for k in range(n)]


def _first_nonzero(vector):
    for k, value in enumerate(vector):
        value = normal(value)
        if value != 0:
            return k, value
    return None


def _jacobiator(r, n, i, j, k):
    ei, ej, ek = _unit(n, i), _unit(n, j), _unit(n, k)
    first = _bracket(r, n, ei, _bracket(r, n, ej, ek))
    second = _bracket(r, n, ej, _bracket(r, n, ek, ei))
    third = _bracket(r, n, ek, _bracket(r, n, ei, ej))
    return [first[m] + second[m] + third[m] for m in range(n)]


def validate_semidirect(S: SemidirectAlgebra):
    """Lanza AlgebraIdentityError con la identidad violada; devuelve r."""
    n, p = S.n, S.p
    if S.q < p:
        raise InputError(f"dim k = {S.q} menor que p = {p}")
    r = S.structure_constants()
    centre = range(0, p)
    middle = range(p, n - p)
    kernel = range(0, n - p)
    dual = range(n - p, n)

    for (i, j), values in S.k_brackets.items():
        if i not in middle or j not in middle:
            raise InputError(f"Corchete de k fuera del bloque medio: ({i}, {j})")
        if any(k not in centre for k in values):
            raise AlgebraIdentityError(
                "k no es nilpotente de dos pasos", relation=TWO_STEP_IDENTITY, witness=(i, j, values)
            )
    for (i, j), values in S.action.items():
        if i not in dual or j not in kernel or any(k not in kernel for k in values):
            raise InputError(f"Acción de h fuera de k: ({i}, {j}) -> {values}")
    for (i, j), values in S.h_brackets.items():
        if i not in dual or j not in dual or any(k not in dual for k in values):
            raise InputError(f"Corchete de h fuera de h: ({i}, {j})")

    for c, A, B in itertools.product(dual, kernel, kernel):
        if A >= B:
            continue
        value = _first_nonzero(_jacobiator(r, n, c, A, B))
        if value is not None:
            raise AlgebraIdentityError(
                f"φ(e_{c}) no es una derivación en ({A}, {B})",
                relation=DERIVATION_IDENTITY,
                witness=(c, A, B, value),
            )
    for a, b, i in itertools.product(dual, dual, kernel):
        if a >= b:
            continue
        value = _first_nonzero(_jacobiator(r, n, a, b, i))
        if value is not None:
            raise AlgebraIdentityError(
                f"φ no es un homomorfismo en ({a}, {b}) sobre e_{i}",
                relation=HOMOMORPHISM_IDENTITY,
                witness=(a, b, i, value),
            )
    for i, j, k in itertools.combinations(range(n), 3):
        value = _first_nonzero(_jacobiator(r, n, i, j, k))
        if value is not None:
            raise AlgebraIdentityError(
                f"Falla Jacobi en ({i}, {j}, {k})", relation=JACOBI_IDENTITY, witness=(i, j, k, value)
            )
    return r


def build_semidirect(S: SemidirectAlgebra) -> FrameData:
    r = validate_semidirect(S)
    frame = FrameData.from_structure(S.gframe(), r, S.p, name=S.name or "semidirecto")
    logger.info("Álgebra %s validada (n=%s, p=%s)", frame.name, S.n, S.p)
    return frame


# ---------------------------------------------------------------------------
# Realización en coordenadas
# ---------------------------------------------------------------------------
def _ad(r, n, i) -> sympy.Matrix:
    """(ad e_i)_{kj} = r^k_ij."""
    return sympy.Matrix(n, n, lambda k, j: r[k][i][j])


def _exp_nilpotent(matrix: sympy.Matrix, t) -> sympy.Matrix:
    n = matrix.rows
    result = sympy.eye(n)
    power = sympy.eye(n)
    for m in range(1, n + 1):
        power = power * matrix
        if power.is_zero_matrix:
            return result
        result += power * t**m / sympy.factorial(m)
    raise PreconditionError("ad no es nilpotente", relation="álgebra nilpotente", witness=matrix)


def realize_nilpotent(F: FrameData, prefix="x") -> FrameData:
    """
    Campos invariantes a izquierda de un álgebra nilpotente con r constantes.
    g^-1 dg = sum_k Ad(exp(-x_n X_n) ... exp(-x_{k+1} X_{k+1})) X_k dx_k.
    """
    n = F.n
    r = [[[sympy.sympify(F.r(k, i, j)) for j in range(n)] for i in range(n)] for k in range(n)]
    if any(value.free_symbols for block in r for row in block for value in row):
        raise PreconditionError("Las constantes de estructura no son constantes", relation="r constante")
    coords = [symbol(f"{prefix}{i + 1}") for i in range(n)]
    theta = sympy.zeros(n, n)
    for k in range(n):
        transport = sympy.eye(n)
        for m in range(n - 1, k, -1):
            transport = transport * _exp_nilpotent(-_ad(r, n, m), coords[m])
        column = transport * sympy.Matrix(_unit(n, k))
        for i in range(n):
            theta[i, k] = normal(column[i])
    det = normal(theta.det(method="berkowitz"))
    if det == 0:
        raise PreconditionError("Coframe degenerado", relation="det Θ ≠ 0")
    inverse = (theta.adjugate(method="berkowitz") / det).applyfunc(normal)
    rows = [[inverse[mu, j] for mu in range(n)] for j in range(n)]
    realized = FrameData.from_vector_fields(
        coords, rows, [list(row) for row in F.gframe], F.p, name=f"{F.name} (coordenadas)"
    )
    for k, i, j in itertools.product(range(n), repeat=3):
        if normal(realized.r(k, i, j) - r[k][i][j]) != 0:
            raise PreconditionError(
                "La realización no reproduce las constantes de estructura",
                relation="[e_i, e_j] = r^k_ij e_k",
                witness=(k, i, j),
            )
    return realized


def coframe(F: FrameData) -> sympy.Matrix:
    """Θ^i_mu = (E^-1)[mu, i] para un marco realizado."""
    if not F.is_realized:
        raise PreconditionError("Marco sin realización en coordenadas", relation="campos E_i")
    E = sympy.Matrix(F.vector_fields)
    return (E.inv(method="ADJ").T).applyfunc(normal)
