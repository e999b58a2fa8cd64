"""
Conexión, curvatura y condiciones de Walker / Walker nulo-Ricci sobre un marco.

Índices por bloques: a en N = span(e_1..e_p), A en el bloque medio,
ā en el bloque dual; K = span(e_1..e_{n-p}) = N^perp.
"""
import itertools
import logging

from core.errors import PreconditionError
from core.models import Check, all_passed
from expr.services import is_zero, normal
from frame.models import FrameData
from tensor.models import Metric, TensorField
from tensor.services import (
    HALF,
    christoffel,
    inverse_metric,
    product,
    ricci,
    riemann,
    sum_terms,
)

logger = logging.getLogger(__name__)


def frame_connection(F: FrameData) -> TensorField:
    """Gamma^k_ij = 1/2 r^k_ij + g^{kl} r_{l(i}^m g_{j)m} (Koszul con métrica constante)."""
    return christoffel(F.metric)


def frame_curvature(F: FrameData) -> TensorField:
    return riemann(F.metric, lowered=True)


def frame_ricci(F: FrameData) -> TensorField:
    return ricci(F.metric)


def torsion_check(F: FrameData) -> Check:
    """nabla_i e_j - nabla_j e_i = [e_i, e_j]."""
    gamma = frame_connection(F)
    for k, i, j in itertools.product(range(F.n), repeat=3):
        delta = normal(gamma[k, i, j] - gamma[k, j, i] - F.r(k, i, j))
        if not is_zero(delta):
            return Check("torsión nula", False, (k, i, j, delta))
    return Check("torsión nula", True)


# ---------------------------------------------------------------------------
# Condiciones de corchete
# ---------------------------------------------------------------------------
def _first_structure(F: FrameData, lowers, uppers):
    for k, (i, j) in itertools.product(uppers, lowers):
        value = F.r(k, i, j)
        if not is_zero(value):
            return (k, i, j, value)
    return None


def _pairs(first, second):
    return [(i, j) for i in first for j in second]


def walker_relations(F: FrameData):
    """(relación, pares (i, j), índices k) cuya r^k_ij debe anularse."""
    N, M, D = F.null_block, F.middle_block, F.dual_block
    everything = range(F.n)
    return [
        ("[e_a, e_b] = 0", _pairs(N, N), everything),
        ("[e_a, e_B] = 0", _pairs(N, M), everything),
        ("[e_A, e_B] en K (r_AB^c̄ = 0)", _pairs(M, M), D),
        ("[e_a, e_c̄] en K^perp (r_ac̄^b̄ = r_ac̄^B = 0)", _pairs(N, D), list(M) + list(D)),
        ("[e_B, e_c̄] en K (r_Bc̄^ā = 0)", _pairs(M, D), D),
        ("[e_ā, e_c̄] en K^perp (r_āc̄^b̄ = r_āc̄^B = 0)", _pairs(D, D), list(M) + list(D)),
    ]


def walker_frame_check(F: FrameData) -> list[Check]:
    """Una verificación por cada relación de corchete del marco de Walker."""
    checks = []
    for relation, pairs, uppers in walker_relations(F):
        witness = _first_structure(F, pairs, uppers)
        checks.append(Check(relation, witness is None, witness))
    return checks


def _require_walker(F: FrameData):
    for check in walker_frame_check(F):
        if not check.passed:
            k, i, j, value = check.witness
            raise PreconditionError(
                f"El marco no es de Walker: r^{k}_({i},{j}) = {value}",
                relation=check.name,
                witness=check.witness,
            )


def _first_derivative(F: FrameData, directions, triples):
    for A in directions:
        for k, i, j in triples:
            value = F.apply(A, F.r(k, i, j))
            if not is_zero(value):
                return (A, k, i, j, value)
    return None


def ricci_null_dual_formula(F: FrameData, b, c):
    """R_bc̄ = 1/2 (g_fc̄ g^{ād} e_b(r^f_ād) + e_b(r^d_c̄d))."""
    g = F.metric
    ginv = inverse_metric(g)
    terms = []
    for f in F.null_block:
        for abar, d in itertools.product(F.dual_block, F.null_block):
            terms.append(product(g.g(f, c), ginv[abar, d], F.apply(b, F.r(f, abar, d))))
    for d in F.null_block:
        terms.append(F.apply(b, F.r(d, c, d)))
    return HALF * sum_terms(terms)


def nrw_conditions(F: FrameData) -> list[Check]:
    """
    Condiciones de Walker nulo-Ricci sobre el marco.
    - requiere las relaciones de Walker (PreconditionError si fallan).
    - r_AB^C = 0, e_A(r_bc̄^d) = 0, e_A(r_BC^d) = e_A(r_Bc̄^D) = 0.
    - R_bc̄ = 0 por la fórmula y por cálculo directo.
    - R_ABCi = R_ābDc̄ = 0 y Ricci soportado en el bloque (ā, c̄).
    """
    _require_walker(F)
    N, M, D = F.null_block, F.middle_block, F.dual_block
    checks = []

    witness = _first_structure(F, _pairs(M, M), M)
    checks.append(Check("r_AB^C = 0", witness is None, witness))

    triples = [(d, b, c) for b in N for c in D for d in N]
    witness = _first_derivative(F, M, triples)
    checks.append(Check("e_A(r_bc̄^d) = 0", witness is None, witness))

    triples = [(d, B, C) for B in M for C in M for d in N]
    triples += [(Dd, B, c) for B in M for c in D for Dd in M]
    witness = _first_derivative(F, M, triples)
    checks.append(Check("e_A(r_BC^d) = e_A(r_Bc̄^D) = 0", witness is None, witness))

    Ric = frame_ricci(F)
    R = frame_curvature(F)
    formula_witness = None
    direct_witness = None
    for b, c in itertools.product(N, D):
        formula = ricci_null_dual_formula(F, b, c)
        if formula_witness is None and not is_zero(formula):
            formula_witness = (b, c, formula)
        if direct_witness is None and not is_zero(Ric[b, c]):
            direct_witness = (b, c, Ric[b, c])
    checks.append(Check("R_bc̄ = 0 (fórmula)", formula_witness is None, formula_witness))
    checks.append(Check("R_bc̄ = 0 (directo)", direct_witness is None, direct_witness))

    witness = None
    for A, B, C, i in itertools.product(M, M, M, range(F.n)):
        if not is_zero(R[A, B, C, i]):
            witness = ("ABCi", (A, B, C, i), R[A, B, C, i])
            break
    if witness is None:
        for abar, b, Dd, c in itertools.product(D, N, M, D):
            if not is_zero(R[abar, b, Dd, c]):
                witness = ("ābDc̄", (abar, b, Dd, c), R[abar, b, Dd, c])
                break
    checks.append(Check("R_ABCi = R_ābDc̄ = 0", witness is None, witness))

    support = None
    for i, j in itertools.product(range(F.n), repeat=2):
        if (i in D and j in D) or is_zero(Ric[i, j]):
            continue
        support = (i, j, Ric[i, j])
        break
    checks.append(Check("Ricci soportado en el bloque (ā, c̄)", support is None, support))
    logger.debug("Condiciones NRW de %s: %s", F.name or "marco", [str(c) for c in checks])
    return checks


def is_null_ricci_walker(F: FrameData) -> bool:
    checks = {check.name: check for check in nrw_conditions(F)}
    return checks["Ricci soportado en el bloque (ā, c̄)"].passed and checks["R_bc̄ = 0 (directo)"].passed


# ---------------------------------------------------------------------------
# Contracción de la curvatura con N
# ---------------------------------------------------------------------------
def curvature_null_contraction(target, null_indices=None) -> list[Check]:
    """
    X ⌟ R = 0 para todo X en N: R_ajkl = 0 para a en `null_indices`.
    - target: FrameData (N = bloque nulo) o Metric con índices de N explícitos.
    - para rango uno se verifica además R_ābdc̄ = 0.
    """
    if isinstance(target, FrameData):
        g: Metric = target.metric
        null_indices = list(target.null_block)
        dual = list(target.dual_block)
    else:
        g = target
        null_indices = list(null_indices or [])
        dual = []
    R = riemann(g, lowered=True)
    witness = None
    for a in null_indices:
        for j, k, l in itertools.product(range(g.n), repeat=3):
            if not is_zero(R[a, j, k, l]):
                witness = (a, j, k, l, R[a, j, k, l])
                break
        if witness:
            break
    checks = [Check("N ⌟ R = 0", witness is None, witness)]
    if len(null_indices) == 1 and dual:
        rank_one = None
        for abar, b, d, c in itertools.product(dual, null_indices, null_indices, dual):
            if not is_zero(R[abar, b, d, c]):
                rank_one = (abar, b, d, c, R[abar, b, d, c])
        checks.append(Check("rango uno: R_ābdc̄ = 0", rank_one is None, rank_one))
    return checks


def connection_block_check(F: FrameData) -> Check:
    """Gamma^k_ab = Gamma^k_Ab = Gamma^B_ai = Gamma^c̄_ai = Gamma^c̄_Ai = 0."""
    gamma = frame_connection(F)
    N, M, D = F.null_block, F.middle_block, F.dual_block
    everything = range(F.n)
    zeros = []
    zeros += [(k, a, b) for k in everything for a in N for b in N]
    zeros += [(k, A, b) for k in everything for A in M for b in N]
    for i in everything:
        zeros += [(B, a, i) for B in M for a in N] + [(B, i, a) for B in M for a in N]
        zeros += [(c, a, i) for c in D for a in N] + [(c, i, a) for c in D for a in N]
        zeros += [(c, A, i) for c in D for A in M] + [(c, i, A) for c in D for A in M]
    for index in zeros:
        if not is_zero(gamma[index]):
            return Check("bloques nulos de la conexión", False, (index, gamma[index]))
    return Check("bloques nulos de la conexión", True)


def walker_summary(F: FrameData) -> list[Check]:
    checks = walker_frame_check(F)
    if all_passed(checks):
        checks.append(connection_block_check(F))
    return checks
