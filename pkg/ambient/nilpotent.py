"""
Perturbaciones nilpotentes de dos pasos: g = g0 + h con (h#)^2 = 0.

Con (g0 + h)^-1 = g0^-1 - h^{##} exacta, Gamma(g0 + h) - Gamma(g0) tiene una
parte lineal y otra cuadrática en h, y Ric(g0 + h) es un polinomio de grado
<= 4 en h; Q(r) es su parte homogénea de grado r.
"""
import itertools
import logging

import sympy

from core.errors import PreconditionError
from core.models import Check, all_passed
from expr.services import is_zero, normal
from tensor.models import Metric, TensorField
from tensor.relative import nilpotency_report, sharp
from tensor.services import (
    HALF,
    box,
    christoffel,
    covariant_derivative,
    divergence,
    inverse_metric,
    lie_derivative,
    product,
    ricci,
    riemann,
    scalar,
    sum_terms,
)

from ambient.equations import fg_residuals
from ambient.models import AmbientMetric, NilpotentRicci, first_nonzero_term, truncate_tensor

logger = logging.getLogger(__name__)


def _raise_both(g0: Metric, h: TensorField):
    n = g0.n
    ginv = inverse_metric(g0).components
    return [
        [sum_terms(product(ginv[k, a], ginv[l, b], h[a, b]) for a in range(n) for b in range(n)) for l in range(n)]
        for k in range(n)
    ]


def _image_outside(g0: Metric, T: TensorField, null_indices):
    Ts = sharp(g0, T)
    for i, j in itertools.product(range(g0.n), repeat=2):
        if i not in null_indices and not is_zero(Ts[i][j]):
            return (i, j, Ts[i][j])
    return None


def _require(checks):
    for check in checks:
        if not check.passed:
            raise PreconditionError(
                f"Falla la hipótesis: {check.name}", relation=check.name, witness=check.witness
            )


def linear_ricci_term(g0: Metric, h: TensorField) -> TensorField:
    """nabla^k nabla_(i h_j)k - 1/2 Box h_ij."""
    n = g0.n
    ginv = inverse_metric(g0).components
    D2 = covariant_derivative(g0, covariant_derivative(g0, h))
    B = box(g0, h)

    def component(i, j):
        terms = []
        for k, a in itertools.product(range(n), repeat=2):
            terms.append(HALF * product(ginv[k, a], D2[a, i, j, k]))
            terms.append(HALF * product(ginv[k, a], D2[a, j, i, k]))
        terms.append(-HALF * B[i, j])
        return sum_terms(terms)

    return TensorField.from_function(("d", "d"), n, component, name="lineal")


def _connection_pieces(g0: Metric, h: TensorField):
    """
    Gamma(g0 + h) - Gamma(g0) = D1 - D2 con S_lij = nabla_i h_jl + nabla_j h_il - nabla_l h_ij,
    D1^k_ij = 1/2 g0^{kl} S_lij (grado 1) y D2^k_ij = 1/2 h^{kl} S_lij (grado 2).
    """
    n = g0.n
    ginv = inverse_metric(g0).components
    h_up = _raise_both(g0, h)
    D = covariant_derivative(g0, h)
    S = [
        [[sum_terms([D[i, j, l], D[j, i, l], -D[l, i, j]]) for j in range(n)] for i in range(n)]
        for l in range(n)
    ]

    def piece(weight, name):
        return TensorField.from_function(
            ("u", "d", "d"),
            n,
            lambda k, i, j: sum_terms(product(weight(k, l), S[l][i][j]) for l in range(n)) * HALF,
            name=name,
            symmetries=(("sym", (1, 2)),),
        )

    return piece(lambda k, l: ginv[k, l], "D1"), piece(lambda k, l: h_up[k][l], "D2")


def _divergence_part(g0: Metric, A: TensorField) -> TensorField:
    """nabla_k A^k_ij - nabla_j A^k_ki."""
    n = g0.n
    DA = covariant_derivative(g0, A)

    def component(i, j):
        terms = [DA[k, k, i, j] for k in range(n)]
        terms.extend(-DA[j, k, k, i] for k in range(n))
        return sum_terms(terms)

    return TensorField.from_function(("d", "d"), n, component)


def _contraction_part(A: TensorField, B: TensorField) -> TensorField:
    """A^k_kp B^p_ij - A^k_jp B^p_ik."""
    n = A.n
    trace = [sum_terms(A[k, k, p] for k in range(n)) for p in range(n)]

    def component(i, j):
        terms = [product(trace[p], B[p, i, j]) for p in range(n)]
        terms.extend(-product(A[k, j, p], B[p, i, k]) for k in range(n) for p in range(n))
        return sum_terms(terms)

    return TensorField.from_function(("d", "d"), n, component)


def ricci_by_degree(g0: Metric, h: TensorField) -> dict:
    """
    Partes homogéneas de Ric(g0 + h) - Ric(g0) en h, con (g0 + h)^-1 = g0^-1 - h^{##}:
    1: div D1
    2: -div D2 + D1.D1
    3: -(D1.D2 + D2.D1)
    4: D2.D2
    """
    D1, D2 = _connection_pieces(g0, h)
    terms = {
        1: [_divergence_part(g0, D1)],
        2: [-_divergence_part(g0, D2), _contraction_part(D1, D1)],
        3: [-_contraction_part(D1, D2), -_contraction_part(D2, D1)],
        4: [_contraction_part(D2, D2)],
    }
    graded = {}
    for r, parts in terms.items():
        total = parts[0]
        for part in parts[1:]:
            total = total + part
        graded[r] = total.map(normal, name=f"Q{r}")
    return graded


def _complement_indices(g0: Metric, null_indices):
    """Índices i con g0(e_i, e_a) = 0 para todo a en N."""
    return [i for i in range(g0.n) if all(is_zero(g0.g(i, a)) for a in null_indices)]


def involutive_check(g0: Metric, null_indices) -> Check:
    """K = N^perp generado por campos del marco y [e_i, e_j] en K."""
    null_indices = list(null_indices)
    name = "K = N⊥ involutivo"
    K = _complement_indices(g0, null_indices)
    if len(K) != g0.n - len(null_indices):
        return Check(name, False, ("base no adaptada a K", K))
    r = g0.structure_functions()
    if r is None:
        return Check(name, True)
    for i, j in itertools.combinations(K, 2):
        for a in null_indices:
            pairing = sum_terms(product(r[k][i][j], g0.g(k, a)) for k in range(g0.n))
            if not is_zero(pairing):
                return Check(name, False, (i, j, a, pairing))
    return Check(name, True)


def linearity_hypotheses(g0: Metric, h: TensorField, null_indices) -> list[Check]:
    """Hipótesis bajo las que Ric(g0 + h) pierde los términos Q3, Q4 y Q2."""
    null_indices = list(null_indices)
    n = g0.n
    gamma = christoffel(g0)
    image = _image_outside(g0, h, null_indices)
    checks = [Check("Im h ⊂ N", image is None, image), involutive_check(g0, null_indices)]

    witness = None
    for a, b, k in itertools.product(null_indices, null_indices, range(n)):
        if k not in null_indices and not is_zero(gamma[k, b, a]):
            witness = (k, b, a, gamma[k, b, a])
            break
    checks.append(Check("nabla_Z Y ∈ N (Y, Z ∈ N)", witness is None, witness))

    witness = None
    for i, a, c in itertools.product(range(n), null_indices, null_indices):
        pairing = sum_terms(product(gamma[k, i, a], g0.g(k, c)) for k in range(n))
        if not is_zero(pairing):
            witness = (i, a, c, pairing)
            break
    checks.append(Check("nabla_X Y ∈ K (Y ∈ N)", witness is None, witness))

    div_items = divergence(g0, h).nonzero_items()
    checks.append(Check("div h = 0", not div_items, div_items[0] if div_items else None))

    witness = None
    for a in null_indices:
        Y = TensorField.from_function(("u",), n, lambda k, a=a: sympy.Integer(1 if k == a else 0), name=f"e_{a}")
        items = lie_derivative(g0, Y, h).nonzero_items()
        if items:
            witness = (a, items[0])
            break
    checks.append(Check("L_Y h = 0 (Y ∈ N)", witness is None, witness))
    return checks


def nilpotent_ricci(g0: Metric, h: TensorField, null_indices=None) -> NilpotentRicci:
    """
    Ric(g0 + h) ensamblado como Ric(g0) + lineal + Q2 + Q3 + Q4.
    - h: (0,2) simétrico nilpotente con imagen totalmente nula.
    - null_indices: si se dan, se exige Im(h#) en N = span(e_a) y se evalúan
      las hipótesis de linealidad (K involutivo; nabla; derivada de Lie).
    """
    report = nilpotency_report(g0, h)
    _require(report)
    hypotheses = ()
    if null_indices is not None:
        null_indices = list(null_indices)
        witness = _image_outside(g0, h, null_indices)
        _require([Check("Im h ⊂ N", witness is None, witness)])
        hypotheses = tuple(linearity_hypotheses(g0, h, null_indices))

    base = ricci(g0)
    graded = ricci_by_degree(g0, h)
    total = base
    for r in range(1, 5):
        total = total + graded[r]
    total = TensorField(total.signature, total.components, (("sym", (0, 1)),), "Ricci")

    linear = linear_ricci_term(g0, h)
    difference = graded[1].difference(linear)
    checks = [Check("grado 1 = nabla^k nabla_(i h_j)k - Box h / 2", difference is None, difference)]
    if hypotheses:
        held = {check.name for check in hypotheses if check.passed}
        cubic = graded[3].nonzero_items() or graded[4].nonzero_items()
        premise = {"Im h ⊂ N", "K = N⊥ involutivo"} <= held
        checks.append(Check("K involutivo ⇒ Q(3) = Q(4) = 0", not premise or not cubic, cubic[0] if cubic else None))
        quadratic = graded[2].nonzero_items()
        premise = all_passed(hypotheses)
        checks.append(
            Check("hipótesis de linealidad ⇒ Q(2) = 0", not premise or not quadratic, quadratic[0] if quadratic else None)
        )
    logger.debug("Ricci nilpotente: %s", [str(c) for c in hypotheses + tuple(checks)])
    return NilpotentRicci(
        ricci=total,
        base_ricci=base,
        linear=linear,
        quadratic={2: graded[2], 3: graded[3], 4: graded[4]},
        checks=tuple(checks),
        hypotheses=hypotheses,
    )


def _rho_derivative(h: TensorField, times=1) -> TensorField:
    for _ in range(times):
        h = h.map(lambda c: c.diff_rho())
    return h


def curvature_action(g0: Metric, h: TensorField) -> TensorField:
    """R^k_ij^l h_kl = g0^{ka} R_aij^l h_kl."""
    n = g0.n
    ginv = inverse_metric(g0).components
    R = riemann(g0)
    return TensorField.from_function(
        ("d", "d"),
        n,
        lambda i, j: sum_terms(
            product(ginv[k, a], R[a, i, j, l], h[k, l])
            for k, a, l in itertools.product(range(n), repeat=3)
        ),
        name="R.h",
    )


def linear_operator_A(g0: Metric, h: TensorField) -> TensorField:
    """A_ij(h) = 2 rho h''_ij + (2 - n) h'_ij + 2 R^k_ij^l h_kl - Box h_ij."""
    n = g0.n
    h = truncate_tensor(h, sympy.oo)
    h1 = _rho_derivative(h)
    h2 = _rho_derivative(h, 2)
    curvature = curvature_action(g0, h)
    B = box(g0, h)

    def component(i, j):
        return sum_terms([
            2 * h2[i, j].shift(1),
            (2 - n) * h1[i, j],
            2 * curvature[i, j],
            -B[i, j],
        ])

    return TensorField.from_function(("d", "d"), n, component, name="A(h)")


def nrw_hypotheses(g0: Metric, h: TensorField, null_indices) -> list[Check]:
    """g0 Walker nulo-Ricci (Im Ric en N, Scal = 0); h con divergencia nula e imagen en N."""
    null_indices = list(null_indices)
    witness = _image_outside(g0, ricci(g0), null_indices)
    s = normal(scalar(g0))
    div = divergence(g0, h)
    div_items = div.nonzero_items()
    image = _image_outside(g0, h, null_indices)
    return [
        Check("Im Ric ⊂ N", witness is None, witness),
        Check("Scal = 0", is_zero(s), s),
        Check("div h = 0", not div_items, div_items[0] if div_items else None),
        Check("Im h ⊂ N", image is None, image),
    ]


def quad_residual(g0: Metric, h: TensorField, null_indices) -> TensorField:
    """h^{kl} nabla_k nabla_l h_ij + nabla_k h_li nabla^l h^k_j + A_ij(h) + 2 R_ij."""
    _require(nrw_hypotheses(g0, h, null_indices))
    n = g0.n
    h = truncate_tensor(h, sympy.oo)
    ginv = inverse_metric(g0).components
    h_up = _raise_both(g0, h)
    D1 = covariant_derivative(g0, h)
    D2 = covariant_derivative(g0, D1)
    A = linear_operator_A(g0, h)
    Ric = ricci(g0)

    # nabla^l h^k_j = g^{la} g^{kb} nabla_a h_bj
    raised = [
        [
            [
                sum_terms(
                    product(ginv[l, a], ginv[k, b], D1[a, b, j]) for a in range(n) for b in range(n)
                )
                for j in range(n)
            ]
            for k in range(n)
        ]
        for l in range(n)
    ]

    def component(i, j):
        terms = [product(h_up[k][l], D2[k, l, i, j]) for k in range(n) for l in range(n)]
        terms.extend(product(D1[k, l, i], raised[l][k][j]) for k in range(n) for l in range(n))
        terms.extend([A[i, j], 2 * Ric[i, j]])
        return sum_terms(terms)

    return TensorField.from_function(("d", "d"), n, component, name="ecuación cuadrática")


def quad_vs_fg(ambient: AmbientMetric, m: int, null_indices) -> list[Check]:
    """La ecuación cuadrática y E1 se anulan hasta rho^{m-1} a la vez."""
    h = truncate_tensor(ambient.h, m + 1)
    quad = truncate_tensor(quad_residual(ambient.base, h, null_indices), m)
    residuals = fg_residuals(ambient, m)
    quad_witness = first_nonzero_term(quad, m)
    e1_witness = first_nonzero_term(residuals.E1, m)
    checks = [
        Check(f"ecuación cuadrática = O(rho^{m})", quad_witness is None, quad_witness),
        Check(f"E1 = O(rho^{m})", e1_witness is None, e1_witness),
    ]
    checks.append(Check("equivalencia", checks[0].passed == checks[1].passed))
    return checks
