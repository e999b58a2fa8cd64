"""
Detección estructural de coordenadas de Walker.

Orden de coordenadas: (x^a | x^A | x^ā) con a = 1..p. La forma buscada es
2 dx^ā (δ_āb dx^b + F_āB dx^B + H_āb̄ dx^b̄) + G_AB dx^A dx^B
con d_a F = d_a G = 0.
"""
import itertools
import logging

from core.errors import DimensionError
from core.models import Check
from expr.services import is_zero, normal
from tensor.models import Metric
from tensor.relative import nilpotency_report, sharp
from tensor.services import christoffel, ricci, scalar

logger = logging.getLogger(__name__)


def _blocks(n, p):
    return range(0, p), range(p, n - p), range(n - p, n)


def walker_block_form(g: Metric, p: int) -> list[Check]:
    n = g.n
    if not g.is_holonomic:
        raise DimensionError("La detección de coordenadas de Walker requiere una métrica en coordenadas")
    if not 1 <= p <= n // 2:
        raise DimensionError(f"Rango nulo inválido p={p} para n={n}")
    null, middle, dual = _blocks(n, p)
    checks = []

    witness = None
    for a, j in itertools.product(null, list(null) + list(middle)):
        if not is_zero(g.g(a, j)):
            witness = (a, j, g.g(a, j))
            break
    checks.append(Check("g_ab = g_aB = 0", witness is None, witness))

    witness = None
    for a, c in itertools.product(null, dual):
        expected = 1 if c == n - p + a else 0
        if g.g(a, c) != expected:
            witness = (a, c, g.g(a, c))
            break
    checks.append(Check("g_ac̄ = δ_ac̄", witness is None, witness))

    witness = None
    entries = [(c, B) for c in dual for B in middle] + [(A, B) for A in middle for B in middle]
    for a, (i, j) in itertools.product(null, entries):
        value = g.apply(a, g.g(i, j))
        if not is_zero(value):
            witness = (a, i, j, value)
            break
    checks.append(Check("d_a F = d_a G = 0", witness is None, witness))
    return checks


def parallel_null_check(g: Metric, null_indices) -> Check:
    """nabla_X d_a en span(d_a): Gamma^k_ia = 0 para k fuera de N."""
    gamma = christoffel(g)
    null_indices = list(null_indices)
    for a, i, k in itertools.product(null_indices, range(g.n), range(g.n)):
        if k in null_indices:
            continue
        if not is_zero(gamma[k, i, a]):
            return Check("span(d_a) paralelo", False, (k, i, a, gamma[k, i, a]))
    return Check("span(d_a) paralelo", True)


def walker_check_coordinates(g: Metric, p: int) -> list[Check]:
    """Forma por bloques (no fatal) y paralelismo de span(d_1..d_p)."""
    checks = walker_block_form(g, p)
    checks.append(parallel_null_check(g, range(p)))
    logger.debug("Walker en coordenadas (%s, p=%s): %s", g.name, p, [str(c) for c in checks])
    return checks


def nrw_coordinate_checks(g: Metric, null_indices) -> list[Check]:
    """Ricci nilpotente con imagen en N = span(d_a) y Scal = 0."""
    null_indices = list(null_indices)
    Ric = ricci(g)
    checks = nilpotency_report(g, Ric)
    Rs = sharp(g, Ric)
    witness = None
    for i, j in itertools.product(range(g.n), repeat=2):
        if i not in null_indices and not is_zero(Rs[i][j]):
            witness = (i, j, Rs[i][j])
            break
    checks.append(Check("Im Ric ⊂ N", witness is None, witness))
    s = normal(scalar(g))
    checks.append(Check("Scal = 0", is_zero(s), s))
    return checks
