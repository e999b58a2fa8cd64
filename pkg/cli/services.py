"""
Lógica de los comandos: cada función recibe un MetricDocument y devuelve un Report.

Los errores de entrada se propagan como InputError (código 2); las fallas
matemáticas quedan como verificaciones fallidas con su testigo (código 1).
"""
import logging

import sympy

from ambient.closed_forms import einstein_ambient
from ambient.equations import ambient_ricci_direct, compare_residuals, fg_residuals
from ambient.expansion import expand_generic, nrw_coefficient_audit, obstruction
from ambient.models import AmbientMetric
from core.errors import InputError, ObstructedError, OracleError, PreconditionError
from core.models import Check, all_passed
from expr.services import normal
from frame.services import curvature_null_contraction, nrw_conditions, walker_summary
from frame.walker import nrw_coordinate_checks, walker_check_coordinates
from oracle.services import verify_ricci
from tensor.models import TensorField
from tensor.services import bach, christoffel, cotton, ricci, riemann, scalar, schouten, weyl

from cli.metricfile import load_ambient_terms
from cli.models import MetricDocument, Report
from cli.reports import format_value, index_labels, input_digest, tensor_values

logger = logging.getLogger(__name__)


def new_report(command: str, document: MetricDocument, flags: dict) -> Report:
    flags = {k: v for k, v in flags.items() if v is not None}
    return Report(command=command, input_digest=input_digest(document.text, flags), flags=flags)


def parse_normalization(value) -> sympy.Rational | None:
    """'obstruction=<racional>' -> racional."""
    if value is None:
        return None
    key, _, number = value.partition("=")
    if key.strip() != "obstruction" or not number.strip():
        raise InputError(f"Normalización inválida {value!r}: se espera obstruction=<racional>")
    try:
        return sympy.Rational(number.strip())
    except (TypeError, ValueError) as exc:
        raise InputError(f"Normalización inválida {value!r}") from exc


def expected_checks(document: MetricDocument, computed: dict) -> list[Check]:
    """Compara los valores de [expected] con los calculados (tensores o escalares)."""
    checks = []
    for key, target in computed.items():
        if key not in document.expected:
            continue
        expected = document.expected[key]
        if isinstance(target, TensorField):
            n = target.n
            reference = TensorField.from_function(
                ("d", "d"), n, lambda i, j: expected.get((i, j), 0) if isinstance(expected, dict) else 0
            )
            difference = target.difference(reference)
            checks.append(Check(f"{key} esperado", difference is None, difference))
        else:
            delta = normal(target - expected)
            checks.append(Check(f"{key} esperado", delta == 0, delta))
    return checks


def _bounds(document: MetricDocument) -> dict:
    """Opciones bounds_<coordenada> = a, b para el muestreo del oráculo."""
    bounds = {}
    for key, value in document.options.items():
        if key.startswith("bounds_"):
            try:
                low, high = (float(part) for part in value.split(","))
            except ValueError as exc:
                raise InputError(f"Opción {key} inválida: {value!r}") from exc
            bounds[key[len("bounds_"):]] = (low, high)
    return bounds


def oracle_check(document: MetricDocument, richardson=False) -> Check:
    try:
        report = verify_ricci(
            document.metric, bindings=document.bindings, bounds=_bounds(document), richardson=richardson
        )
    except OracleError as exc:
        return Check("oráculo numérico de Ricci", False, str(exc))
    return Check("oráculo numérico de Ricci", report.passed, report.discrepancy, detail=str(report))


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------
def run_curvature(document: MetricDocument, oracle=False, richardson=False) -> Report:
    report = new_report("curvature", document, {"oracle": oracle or None, "richardson": richardson or None})
    g = document.metric
    labels = index_labels(document)
    Ric = ricci(g)
    s = normal(scalar(g))
    report.values["Gamma"] = tensor_values(christoffel(g), "Gamma", labels)
    report.values["Riemann"] = tensor_values(riemann(g), "R", labels)
    report.values["Ricci"] = tensor_values(Ric, "Ric", labels)
    report.values["Scal"] = format_value(s)
    computed = {"ricci": Ric, "scalar": s}
    if g.n >= 3:
        P, B = schouten(g), bach(g)
        report.values["Schouten"] = tensor_values(P, "P", labels)
        report.values["Cotton"] = tensor_values(cotton(g), "C", labels)
        report.values["Weyl"] = tensor_values(weyl(g), "W", labels)
        report.values["Bach"] = tensor_values(B, "B", labels)
        computed.update({"schouten": P, "bach": B})
    report.add(expected_checks(document, computed))
    if oracle:
        report.add(oracle_check(document, richardson))
    logger.info("curvature %s: %s verificaciones", document.name, len(report.checks))
    return report


# ---------------------------------------------------------------------------
# walker-check
# ---------------------------------------------------------------------------
def run_walker_check(document: MetricDocument, rank=None) -> Report:
    p = document.rank(rank)
    if p is None:
        raise InputError("Falta el rango de la distribución nula (--rank o rank = ... en [options])")
    report = new_report("walker-check", document, {"rank": p})
    F = document.frame
    if F is not None:
        if p != F.p:
            raise InputError(f"--rank {p} no coincide con p = {F.p} del marco")
        checks = walker_summary(F)
        report.add(checks)
        if all_passed(checks):
            try:
                report.add(nrw_conditions(F))
            except PreconditionError as exc:
                report.add(Check("condiciones NRW", False, exc.relation))
        report.add(curvature_null_contraction(F))
    else:
        g = document.metric
        report.add(walker_check_coordinates(g, p))
        report.add(nrw_coordinate_checks(g, range(p)))
        report.add(curvature_null_contraction(g, range(p)))
    return report


# ---------------------------------------------------------------------------
# expand
# ---------------------------------------------------------------------------
def load_even_choice(path, document: MetricDocument) -> TensorField:
    """Archivo con una sección [ambient] de orden n/2: su parte sin traza fija g^(n/2)."""
    terms = load_ambient_terms(path, document)
    s = document.n // 2
    values = {}
    for (i, j), bucket in terms.items():
        for (order, log_power), e in bucket.items():
            if order != s or log_power:
                raise InputError(f"La elección debe ser de orden rho^{s} sin logaritmos")
            values[(i, j)] = values[(j, i)] = e
    return TensorField.from_function(("d", "d"), document.n, lambda i, j: values.get((i, j), 0), name="elección")


def _null_indices(document: MetricDocument, rank=None):
    if document.frame is not None:
        return list(document.frame.null_block)
    return document.null_indices(rank)


def run_expand(document: MetricDocument, order=None, even_choice=None, normalization=None, rank=None) -> Report:
    g = document.metric
    n = g.n
    order = order if order is not None else document.option("order")
    order = int(order) if order is not None else None
    flags = {"order": order, "even_choice": even_choice, "normalization": normalization, "rank": rank}
    report = new_report("expand", document, flags)
    norm = parse_normalization(normalization)
    labels = index_labels(document)
    choice = load_even_choice(even_choice, document) if even_choice else None

    if n % 2 == 0 and n >= 4:
        O = obstruction(g, norm)
        report.values["O"] = tensor_values(O.value, "O", labels)
        report.add(list(O.checks))
    try:
        ambient = expand_generic(g, order, even_choice=choice)
    except ObstructedError as exc:
        report.add(Check("obstrucción nula", False, exc.obstruction))
        return report

    m = int(ambient.truncation) - 1
    for k in range(1, m + 1):
        report.series[f"g({k})"] = tensor_values(ambient.coefficient(k), f"g({k})", labels)
    report.add(fg_residuals(ambient, m).checks())

    null = _null_indices(document, rank)
    if null:
        hypotheses = nrw_coordinate_checks(g, null)
        if all_passed(hypotheses):
            report.add(nrw_coefficient_audit(g, ambient, m, null, with_obstruction=n % 2 == 0 and n >= 4))
    if "lambda" in document.options:
        closed = einstein_ambient(g, sympy.Rational(document.options["lambda"]))
        witness = None
        for k in range(1, m + 1):
            difference = ambient.coefficient(k).difference(closed.coefficient(k))
            if difference is not None:
                witness = (k, difference)
                break
        report.add(Check("coincide con la forma cerrada de Einstein", witness is None, witness))
    report.add(expected_checks(document, {f"g{k}": ambient.coefficient(k) for k in range(1, m + 1)}))
    return report


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------
def document_ambient(document: MetricDocument) -> AmbientMetric:
    if not document.has_ambient:
        raise InputError(f"{document.source}: falta la sección [ambient]")
    truncation = sympy.oo if document.truncation is None else document.truncation
    return AmbientMetric.build(document.metric, document.h_rows(), truncation=truncation, name=document.name)


def run_verify(document: MetricDocument, order=None, direct=True) -> Report:
    ambient = document_ambient(document)
    order = order if order is not None else document.option("order")
    if order is None:
        if ambient.is_exact:
            raise InputError("Falta --order para una h exacta")
        order = int(ambient.truncation) - 1
    m = int(order)
    report = new_report("verify", document, {"order": m, "direct": direct})
    labels = index_labels(document)
    for i, j in ((i, j) for i in range(ambient.n) for j in range(i, ambient.n)):
        if not ambient.h[i, j].is_zero_series():
            report.series[f"h[{labels[i]},{labels[j]}]"] = str(ambient.h[i, j])

    residuals = fg_residuals(ambient, m)
    report.add(residuals.checks())
    polynomial = not ambient.has_logs() and all(e.q == 1 for e in ambient.exponents())
    if direct and polynomial:
        difference = compare_residuals(residuals, ambient_ricci_direct(ambient, order=m))
        report.add(Check("residuos = Ricci ambiente directo", difference is None, difference))
    return report
