"""
Ejemplos incorporados. Cada uno lee su archivo de fixtures/ y corre la cadena
completa, comparando con los valores de la sección [expected].
"""
import itertools
import logging
from pathlib import Path

import sympy

from ambient.closed_forms import einstein_ambient, left_invariant_ambient, ppwave_ambient, ppwave_obstruction
from ambient.constants import PUBLISHED_RATIO_N4
from ambient.equations import ambient_ricci_direct, fg_residuals, residual_blocks
from ambient.expansion import expand_generic, nrw_coefficient_audit, obstruction
from ambient.models import first_nonzero_term
from core.errors import InputError, ObstructedError
from core.models import Check
from expr.services import RHO, normal
from frame.services import nrw_conditions
from tensor.models import TensorField
from tensor.services import ricci

from cli.metricfile import load_metric_file
from cli.models import MetricDocument, Report
from cli.reports import index_labels, tensor_values
from cli.services import document_ambient, expected_checks, new_report

logger = logging.getLogger(__name__)

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.metric"


def _coefficients_match(label, ambient, reference, orders) -> Check:
    for k in orders:
        difference = ambient.coefficient(k).difference(reference.coefficient(k))
        if difference is not None:
            return Check(label, False, (k, difference))
    return Check(label, True)


def _gpp_blocks(document: MetricDocument):
    """(coords, H, G, p) leídos de una métrica gpp en coordenadas de Walker."""
    g = document.metric
    p = document.rank()
    if p is None:
        raise InputError(f"{document.source}: falta rank = ... en [options]")
    n = g.n
    H = [[g.g(n - p + a, n - p + b) for b in range(p)] for a in range(p)]
    G = [[g.g(p + A, p + B) for B in range(n - 2 * p)] for A in range(n - 2 * p)]
    return g.coords, H, G, p


def sig22(document: MetricDocument, report: Report):
    g = document.metric
    Ric = ricci(g)
    O = obstruction(g, normalization=1)
    published = O.renormalized(PUBLISHED_RATIO_N4).value
    report.values["O"] = tensor_values(O.value, "O", index_labels(document))
    report.add(expected_checks(document, {"ricci": Ric, "obstruction": O.value, "published": published}))
    report.add(list(O.checks))

    ambient = document_ambient(document)
    report.add(fg_residuals(ambient, 1).checks())
    witness = first_nonzero_term(fg_residuals(ambient, 2).E1, 2)
    expected = None
    if witness is not None:
        index = witness[0]
        expected = normal(-published[index])
    report.add(Check("E1 en rho^1 = -O publicado", witness is not None and normal(witness[3] - expected) == 0, witness))

    E1, _, _ = residual_blocks(ambient_ricci_direct(ambient), g.n)
    mismatch = None
    for i, j in itertools.product(range(g.n), repeat=2):
        delta = normal(E1[i, j] - RHO * (3 * RHO - 1) * published[i, j])
        if delta != 0:
            mismatch = ((i, j), delta)
            break
    report.add(Check("Ric(g~)|TM = rho (3 rho - 1) O", mismatch is None, mismatch))


def ppwave_odd(document: MetricDocument, report: Report):
    coords, H, G, p = _gpp_blocks(document)
    g = document.metric
    m = int(document.option("order", 4))
    ambient = ppwave_ambient(coords, H, G, p, truncation=m + 1, functions=document.functions)
    for k in range(1, m + 1):
        report.series[f"g({k})"] = tensor_values(ambient.coefficient(k), f"g({k})", index_labels(document))
    report.add(fg_residuals(ambient, m).checks())
    report.add(_coefficients_match("expansión = forma cerrada", expand_generic(g, m), ambient, range(1, m + 1)))
    report.add(nrw_coefficient_audit(g, ambient, m, list(range(p))))
    report.add(expected_checks(document, {"g1": ambient.coefficient(1)}))


def ppwave_even(document: MetricDocument, report: Report):
    coords, H, G, p = _gpp_blocks(document)
    g = document.metric
    n = g.n
    O = obstruction(g, normalization=1)
    closed = ppwave_obstruction(coords, H, G, p, n, functions=document.functions)
    reference = TensorField.from_function(
        ("d", "d"), n, lambda i, j: closed[i - (n - p), j - (n - p)] if min(i, j) >= n - p else 0
    )
    difference = O.tensor.difference(reference)
    report.add(Check("O = factor * Delta^{n/2} H", difference is None, difference))
    report.add(expected_checks(document, {"obstruction": O.value}))

    try:
        ppwave_ambient(coords, H, G, p, functions=document.functions)
        report.add(Check("sin rama logarítmica: obstruida", False))
    except ObstructedError:
        report.add(Check("sin rama logarítmica: obstruida", True))

    m = int(document.option("order", 4))
    ambient = ppwave_ambient(coords, H, G, p, truncation=m + 1, log_branch=True, functions=document.functions)
    labels = index_labels(document)
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        if not ambient.h[i, j].is_zero_series():
            report.series[f"h[{labels[i]},{labels[j]}]"] = str(ambient.h[i, j])
    report.add(fg_residuals(ambient, m).checks())
    report.add(expected_checks(document, {"h1": ambient.coefficient(1), "h2log": ambient.coefficient(2, 1)}))


def heisenberg_semidirect(document: MetricDocument, report: Report):
    F = document.frame
    if F is None:
        raise InputError(f"{document.source}: se esperaba un marco ([frame] o [algebra])")
    report.add(nrw_conditions(F))
    ambient = left_invariant_ambient(F)
    Ric = ricci(F.metric)
    expected = Ric.scale(sympy.Rational(2, F.n - 2))
    difference = ambient.coefficient(1).difference(expected)
    report.add(Check("g^(1) = 2 Ric / (n - 2)", difference is None, difference))
    m = int(document.option("order", 6))
    report.add(fg_residuals(ambient, m).checks())
    report.add(expected_checks(document, {"ricci": Ric}))


def einstein_h3(document: MetricDocument, report: Report):
    g = document.metric
    if "lambda" not in document.options:
        raise InputError(f"{document.source}: falta lambda = ... en [options]")
    ambient = einstein_ambient(g, sympy.Rational(document.options["lambda"]))
    report.add(Check("h exacta", ambient.is_exact, ambient.truncation))
    items = ambient_ricci_direct(ambient).nonzero_items()
    report.add(Check("Ric(g~) = 0", not items, items[0] if items else None))
    report.add(_coefficients_match("expansión = forma cerrada", expand_generic(g, 2), ambient, (1, 2)))
    report.add(expected_checks(document, {"g1": ambient.coefficient(1)}))


EXAMPLES = {
    "sig22": sig22,
    "ppwave-odd": ppwave_odd,
    "ppwave-even": ppwave_even,
    "heisenberg-semidirect": heisenberg_semidirect,
    "einstein-h3": einstein_h3,
}


def run_example(name: str) -> Report:
    if name not in EXAMPLES:
        raise InputError(f"Ejemplo desconocido {name!r}; disponibles: {', '.join(EXAMPLES)}")
    document = load_metric_file(fixture_path(name))
    report = new_report("example", document, {"name": name})
    EXAMPLES[name](document, report)
    logger.info("Ejemplo %s: %s verificaciones", name, len(report.checks))
    return report
