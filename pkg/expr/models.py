"""
Tipos del motor de expresiones.

Las expresiones mismas son objetos de sympy (ver expr.services). Aquí vive
RhoSeries: una serie poli-homogénea truncada en rho con términos
rho^e y rho^e·log(rho), exponentes semienteros y coeficientes libres de rho.
"""
from dataclasses import dataclass, field

import sympy

from core.errors import SeriesError, TruncationError
from expr.services import LOG_RHO, RHO, normal

MAX_LOG_POWER = 1


def _as_rational(value):
    if value is sympy.oo or value == sympy.oo:
        return sympy.oo
    value = sympy.Rational(value)
    if (2 * value).q != 1:
        raise SeriesError(f"Exponente no semientero: {value}", witness=value)
    return value


@dataclass(frozen=True)
class RhoSeries:
    """
    Serie {(exponente, potencia_log): coeficiente} conocida para exponentes < truncation.
    - truncation = oo indica una serie exacta (polinomio en rho^{1/2} y log rho).
    - Los coeficientes nulos y los términos más allá de la truncación no se guardan.
    """

    terms: dict = field(default_factory=dict)
    truncation: sympy.Expr = sympy.oo

    is_series = True

    # ------------------------------------------------------------------
    # Construcción
    # ------------------------------------------------------------------
    @classmethod
    def build(cls, terms, truncation=sympy.oo) -> "RhoSeries":
        truncation = _as_rational(truncation)
        clean = {}
        for (exponent, log_power), coefficient in terms.items():
            exponent = _as_rational(exponent)
            if exponent >= truncation:
                continue
            coefficient = normal(coefficient)
            if coefficient == 0:
                continue
            if coefficient.has(RHO):
                raise SeriesError("Coeficiente dependiente de rho", witness=coefficient)
            if not 0 <= log_power <= MAX_LOG_POWER:
                raise SeriesError(f"Potencia de log(rho) no admitida: {log_power}", witness=coefficient)
            clean[(exponent, int(log_power))] = coefficient
        return cls(terms=clean, truncation=truncation)

    @classmethod
    def constant(cls, value, truncation=sympy.oo) -> "RhoSeries":
        value = sympy.sympify(value)
        if value.has(RHO):
            from expr.services import rho_coefficients
            return rho_coefficients(value).truncated(truncation)
        return cls.build({(sympy.Integer(0), 0): value}, truncation)

    @classmethod
    def zero(cls, truncation=sympy.oo) -> "RhoSeries":
        return cls.build({}, truncation)

    @classmethod
    def monomial(cls, coefficient, exponent, log_power=0, truncation=sympy.oo) -> "RhoSeries":
        return cls.build({(exponent, log_power): coefficient}, truncation)

    # ------------------------------------------------------------------
    # Consultas
    # ------------------------------------------------------------------
    def items(self):
        return sorted(self.terms.items(), key=lambda item: item[0])

    def exponents(self):
        return sorted({exponent for exponent, _ in self.terms})

    def valuation(self):
        """Menor exponente presente (la truncación si no hay términos)."""
        if not self.terms:
            return self.truncation
        return min(exponent for exponent, _ in self.terms)

    def coefficient(self, exponent, log_power=0) -> sympy.Expr:
        exponent = _as_rational(exponent)
        if exponent >= self.truncation:
            raise TruncationError(
                f"Coeficiente rho^{exponent} desconocido (truncación {self.truncation})",
                witness=exponent,
            )
        return self.terms.get((exponent, log_power), sympy.Integer(0))

    def is_zero_series(self) -> bool:
        return not self.terms

    def truncated(self, truncation) -> "RhoSeries":
        truncation = _as_rational(truncation)
        if truncation >= self.truncation:
            return self
        return RhoSeries.build(self.terms, truncation)

    def to_expr(self) -> sympy.Expr:
        total = sympy.Integer(0)
        for (exponent, log_power), coefficient in self.terms.items():
            if exponent.q != 1:
                raise SeriesError("Exponente semientero: no representable como Expr", witness=exponent)
            total += coefficient * RHO**exponent * LOG_RHO**log_power
        return normal(total)

    # ------------------------------------------------------------------
    # Aritmética
    # ------------------------------------------------------------------
    def _coerce(self, other) -> "RhoSeries":
        if isinstance(other, RhoSeries):
            return other
        return RhoSeries.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for key, coefficient in other.terms.items():
            terms[key] = terms.get(key, 0) + coefficient
        return RhoSeries.build(terms, min(self.truncation, other.truncation))

    __radd__ = __add__

    def __neg__(self):
        return RhoSeries.build({key: -c for key, c in self.terms.items()}, self.truncation)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        truncation = min(
            self.truncation + other.valuation(),
            other.truncation + self.valuation(),
        )
        terms = {}
        for (e1, l1), c1 in self.terms.items():
            for (e2, l2), c2 in other.terms.items():
                key = (e1 + e2, l1 + l2)
                terms[key] = terms.get(key, 0) + c1 * c2
        return RhoSeries.build(terms, truncation)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = sympy.sympify(other)
        if other.has(RHO) or other == 0:
            raise SeriesError("Solo se divide por escalares no nulos libres de rho", witness=other)
        return self.map(lambda c: c / other)

    # ------------------------------------------------------------------
    # Cálculo
    # ------------------------------------------------------------------
    def diff_rho(self) -> "RhoSeries":
        terms = {}
        for (exponent, log_power), coefficient in self.terms.items():
            if exponent != 0:
                key = (exponent - 1, log_power)
                terms[key] = terms.get(key, 0) + exponent * coefficient
            if log_power:
                key = (exponent - 1, log_power - 1)
                terms[key] = terms.get(key, 0) + log_power * coefficient
        return RhoSeries.build(terms, self.truncation - 1)

    def shift(self, k) -> "RhoSeries":
        """Multiplica por rho^k."""
        k = _as_rational(k)
        return RhoSeries.build(
            {(exponent + k, log_power): c for (exponent, log_power), c in self.terms.items()},
            self.truncation + k,
        )

    def map(self, fn) -> "RhoSeries":
        """Aplica `fn` a cada coeficiente (p.ej. derivar en una coordenada)."""
        return RhoSeries.build({key: fn(c) for key, c in self.terms.items()}, self.truncation)

    def __str__(self):
        from expr.printer import to_text

        parts = []
        for (exponent, log_power), coefficient in self.items():
            label = f"rho^{exponent}" + (" log(rho)" if log_power else "")
            parts.append(f"({to_text(coefficient)}) {label}")
        tail = "" if self.truncation == sympy.oo else f" + O(rho^{self.truncation})"
        return (" + ".join(parts) or "0") + tail
