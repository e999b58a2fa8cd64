"""
Tipos de la línea de comandos.

- MetricDocument: archivo .metric ya validado (métrica, marco o álgebra,
  serie h opcional, opciones y valores esperados).
- Report: resultado de un comando; determinista dado archivo + flags.
"""
from dataclasses import dataclass, field

import sympy

from core.conf import get_report_schema
from core.models import Check, all_passed, failed
from expr.models import RhoSeries
from tensor.models import Metric


@dataclass(frozen=True, eq=False)
class MetricDocument:
    source: str
    text: str
    coords: tuple
    metric: Metric
    functions: dict = field(default_factory=dict)
    bindings: dict = field(default_factory=dict)
    frame: object = None
    algebra: object = None
    h_terms: dict = field(default_factory=dict)
    truncation: object = None
    options: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.options.get("name") or self.metric.name or self.source

    @property
    def n(self) -> int:
        return self.metric.n

    @property
    def has_ambient(self) -> bool:
        return bool(self.h_terms) or self.truncation is not None

    def rank(self, override=None) -> int | None:
        if override is not None:
            return int(override)
        if "rank" in self.options:
            return int(self.options["rank"])
        if self.frame is not None:
            return self.frame.p
        return None

    def null_indices(self, override=None) -> list[int]:
        p = self.rank(override)
        return list(range(p)) if p else []

    def option(self, key, default=None):
        return self.options.get(key, default)

    def h_rows(self):
        """Matriz de RhoSeries con la truncación declarada (infinito si no hay)."""
        n = self.n
        truncation = sympy.oo if self.truncation is None else self.truncation
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                terms = self.h_terms.get((min(i, j), max(i, j)), {})
                row.append(RhoSeries.build(dict(terms), truncation))
            rows.append(row)
        return rows


@dataclass
class Report:
    """Informe JSON: schema, command, input_digest, flags, checks, series, values."""

    command: str
    input_digest: str = ""
    flags: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    schema: str = field(default_factory=get_report_schema)

    def add(self, checks):
        if isinstance(checks, Check):
            checks = [checks]
        self.checks.extend(checks)

    @property
    def passed(self) -> bool:
        return all_passed(self.checks)

    @property
    def failures(self) -> list:
        return failed(self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1
