"""
Las tres constantes que comparten el nombre c_n.

- obstruction_norm: factor aplicado a la obstrucción canónica (configurable).
- ppwave_log_c: coeficiente de la rama logarítmica de las ondas pp en dimensión par.
- nrw_box_c: O = nrw_box_c(n) * Box^{n/2-1} Ric para métricas NRW lineales.
"""
import math

import sympy

from core.conf import get_obstruction_norm
from core.errors import DimensionError

# B = BACH_RATIO_N4 * O para n = 4 (normalización canónica)
BACH_RATIO_N4 = sympy.Integer(-1)
# O del ejemplo de signatura (2,2) con la normalización publicada = -1 * O canónico
PUBLISHED_RATIO_N4 = sympy.Integer(-1)


def _half(n) -> int:
    if n % 2 or n < 4:
        raise DimensionError(f"Se requiere n par >= 4 (n = {n})")
    return n // 2


def obstruction_norm() -> sympy.Rational:
    return get_obstruction_norm()


def ppwave_log_c(n) -> sympy.Rational:
    """c_n = -1 / ((s-1)! prod_{i=0}^{s-1} (2i - n)), n = 2s."""
    s = _half(n)
    denominator = math.factorial(s - 1)
    for i in range(s):
        denominator *= 2 * i - n
    return sympy.Rational(-1, denominator)


def ppwave_q(k, n, q0=0):
    """q_k = q_0 + sum_{i=1}^k (n + 4i) / (i (n + 2i))."""
    total = sympy.sympify(q0)
    for i in range(1, k + 1):
        total += sympy.Rational(n + 4 * i, i * (n + 2 * i))
    return total


def nrw_box_c(n) -> sympy.Rational:
    """
    Con m = n/2 - 1: m g^(1) = Ric y 2(k - m) g^(k+1) = Box g^(k) (coeficientes con 1/k!).
    O canónico = -1/2 Box a_{s-1} con a_k = g^(k)/k!.
    """
    s = _half(n)
    m = s - 1
    denominator = 2 * m
    for k in range(1, s - 1):
        denominator *= 2 * (k + 1) * (k - m)
    return sympy.Rational(-1, denominator)


def sol_denominator(k, n, sign) -> sympy.Integer:
    """k! prod_{i=1}^k (2i + sign n)."""
    value = math.factorial(k)
    for i in range(1, k + 1):
        value *= 2 * i + sign * n
    return sympy.Integer(value)
