"""
Informes de los comandos: texto para la terminal y JSON versionado.

Esquema (schema = AMBIENTFORGE_REPORT_SCHEMA):
    {"schema", "command", "input_digest", "flags",
     "checks": [{"name", "status", "witness"}], "series", "values"}
"""
import hashlib
import itertools
import json
import logging
from pathlib import Path

import numpy as np
import sympy

from core.errors import InputError
from expr.printer import to_text
from expr.services import is_zero
from ambient.models import ObstructionTensor
from tensor.models import TensorField

from cli.models import Report

logger = logging.getLogger(__name__)


def input_digest(text: str, flags: dict) -> str:
    """sha256 del texto del archivo más los flags ordenados."""
    payload = text + "\n" + json.dumps(flags, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def index_labels(document) -> list[str]:
    if document.frame is None and document.coords:
        return list(document.coords)
    return [str(i + 1) for i in range(document.n)]


def tensor_values(T: TensorField, symbol: str, labels=None) -> dict:
    """Componentes no nulas (una por clase de simetría si T es simétrico)."""
    labels = labels or [str(i + 1) for i in range(T.n)]
    symmetric = T.rank == 2 and all(
        is_zero(T[i, j] - T[j, i]) for i, j in itertools.combinations(range(T.n), 2)
    )
    values = {}
    for index in itertools.product(range(T.n), repeat=T.rank):
        if symmetric and index[0] > index[1]:
            continue
        text = format_value(T[index])
        if text == "0":
            continue
        values[f"{symbol}[{','.join(labels[i] for i in index)}]"] = text
    return values


def format_value(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, (float, np.floating)):
        return float(value)
    if getattr(value, "is_series", False):
        return str(value)
    if isinstance(value, TensorField):
        return tensor_values(value, value.name or "T")
    if isinstance(value, ObstructionTensor):
        return tensor_values(value.value, "O")
    if isinstance(value, sympy.MatrixBase):
        return [[format_value(entry) for entry in row] for row in value.tolist()]
    if isinstance(value, sympy.Basic):
        return to_text(value)
    if isinstance(value, dict):
        return {str(k): format_value(v) for k, v in value.items()}
    if isinstance(value, (tuple, list, range)):
        return [format_value(item) for item in value]
    return str(value)


def report_dict(report: Report) -> dict:
    return {
        "schema": report.schema,
        "command": report.command,
        "input_digest": report.input_digest,
        "flags": {k: format_value(v) for k, v in sorted(report.flags.items())},
        "checks": [
            {"name": check.name, "status": check.status, "witness": format_value(check.witness)}
            for check in report.checks
        ],
        "series": report.series,
        "values": report.values,
    }


def write_json(report: Report, path) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(report_dict(report), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"No se puede escribir {path}: {exc.strerror or exc}") from exc
    logger.info("Informe %s escrito en %s", report.command, path)
    return path


def render_lines(report: Report):
    """(nivel, texto) para la salida de la terminal; nivel en success/warning/error/plain."""
    yield "plain", f"{report.command} · {report.input_digest[:12]}"
    for block in (report.values, report.series):
        for key, value in block.items():
            if isinstance(value, dict):
                if not value:
                    yield "plain", f"  {key}: 0"
                for label, text in value.items():
                    yield "plain", f"  {label} = {text}"
            else:
                yield "plain", f"  {key} = {value}"
    for check in report.checks:
        if check.passed:
            yield "success", f"  {check}"
        else:
            yield "error", f"  {check} · testigo: {format_value(check.witness)}"
    if not report.checks:
        yield "warning", "  sin verificaciones"
