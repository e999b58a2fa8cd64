"""
Operaciones básicas sobre expresiones exactas (sympy).

Las expresiones son polinomios en variables, átomos de función (con sus
derivadas parciales) y log(rho). Las funciones racionales solo aparecen en la
capa tensorial (inversas de métricas) y se normalizan con `cancel`.
"""
import logging
import math

import sympy
from sympy.core.function import AppliedUndef

from core.errors import InputError, RhoDependenceError, UnboundAtomError

logger = logging.getLogger(__name__)

RHO = sympy.Symbol("rho", positive=True)
LOG_RHO = sympy.log(RHO)


def symbol(name: str) -> sympy.Symbol:
    if name == "rho":
        return RHO
    return sympy.Symbol(name)


def function_atom(name: str, args) -> sympy.Expr:
    """Átomo H(x, u) con argumentos declarados (nombres o símbolos)."""
    variables = [a if isinstance(a, sympy.Symbol) else symbol(a) for a in args]
    return sympy.Function(name)(*variables)


def _has_negative_powers(e: sympy.Expr) -> bool:
    return any(p.exp.is_negative for p in e.atoms(sympy.Pow))


def normal(e) -> sympy.Expr:
    """Forma normal: polinomio expandido o cociente cancelado."""
    if getattr(e, "is_series", False):
        return e
    e = sympy.sympify(e)
    if e.is_Rational or e.is_Symbol:
        return e
    if _has_negative_powers(e):
        return sympy.cancel(e)
    return sympy.expand(e)


def is_zero(value) -> bool:
    """Vale para expresiones y para RhoSeries (ambas ya normalizadas)."""
    check = getattr(value, "is_zero_series", None)
    if check is not None:
        return check()
    return value == 0


def diff(e, v, coordinates=None) -> sympy.Expr:
    v = symbol(v) if isinstance(v, str) else v
    if coordinates is not None and v != RHO and v not in coordinates:
        raise InputError(f"Variable no declarada: {v}")
    return normal(sympy.diff(e, v))


def substitute(e, bindings) -> sympy.Expr:
    if not bindings:
        return normal(e)
    resolved = {
        (symbol(k) if isinstance(k, str) else k): sympy.sympify(v)
        for k, v in bindings.items()
    }
    return normal(sympy.sympify(e).subs(resolved, simultaneous=True))


def taylor_coefficients(e, order: int, var=RHO) -> list:
    """Coeficientes de Taylor en `var` hasta `order` (inclusive) vía derivadas."""
    coefficients = []
    current = sympy.sympify(e)
    for k in range(order + 1):
        value = normal(current.subs(var, 0)) / math.factorial(k)
        coefficients.append(normal(value))
        current = sympy.diff(current, var)
    return coefficients


def rho_coefficients(e, max_order=None):
    """
    Serie en rho de una expresión polinómica en rho y log(rho).
    - Conserva los términos con exponente <= max_order (incluido); como los
      exponentes son semienteros, la truncación es max_order + 1/2. None = exacta.
    - Dependencia de rho no representable (p.ej. H(rho)) -> RhoDependenceError.
    """
    from expr.models import RhoSeries

    expanded = sympy.expand(sympy.sympify(e))
    # rho = s^2 deja los exponentes semienteros como potencias enteras de s
    root = sympy.Dummy("s", positive=True)
    log_atom = sympy.Dummy("L")
    prepared = expanded.xreplace({LOG_RHO: log_atom}).subs(RHO, root**2)
    try:
        poly = sympy.Poly(sympy.expand(prepared), root, log_atom)
    except sympy.PolynomialError as exc:
        raise RhoDependenceError(f"Dependencia de rho no representable: {exc}", witness=expanded) from exc

    terms = {}
    for (power, log_power), coefficient in poly.terms():
        if coefficient.has(root) or coefficient.has(RHO):
            raise RhoDependenceError("Coeficiente con rho dentro de un átomo", witness=coefficient)
        terms[(sympy.Rational(power, 2), log_power)] = coefficient
    truncation = sympy.oo if max_order is None else sympy.Rational(max_order) + sympy.Rational(1, 2)
    return RhoSeries.build(terms, truncation)


def eval_num(e, point=None, funcs=None) -> float:
    """
    Evalúa numéricamente.
    - point: {variable: float}; funcs: {átomo o derivada: float}.
    Todo átomo debe estar ligado (UnboundAtomError).
    """
    point = point or {}
    funcs = funcs or {}
    expression = sympy.sympify(e)

    bound_funcs = {}
    for key, value in funcs.items():
        atom = key
        if isinstance(key, str):
            from expr.parser import parse
            atom = parse(key, functions=_infer_functions(expression))
        bound_funcs[atom] = sympy.Float(value)

    derivatives = expression.atoms(sympy.Derivative)
    missing = [d for d in derivatives if d not in bound_funcs]
    if missing:
        raise UnboundAtomError(f"Derivada sin valor: {missing[0]}", witness=missing[0])
    expression = expression.xreplace({d: bound_funcs[d] for d in derivatives})

    atoms = expression.atoms(AppliedUndef)
    missing = [a for a in atoms if a not in bound_funcs]
    if missing:
        raise UnboundAtomError(f"Función sin valor: {missing[0]}", witness=missing[0])
    expression = expression.xreplace({a: bound_funcs[a] for a in atoms})

    values = {(symbol(k) if isinstance(k, str) else k): sympy.Float(v) for k, v in point.items()}
    missing = [s for s in expression.free_symbols if s not in values]
    if missing:
        raise UnboundAtomError(f"Variable sin valor: {missing[0]}", witness=missing[0])
    return float(expression.xreplace(values).evalf())


def _infer_functions(expression):
    """Firmas de las funciones presentes en la expresión (nombre -> argumentos)."""
    return {
        atom.func.__name__: tuple(str(a) for a in atom.args)
        for atom in expression.atoms(AppliedUndef)
    }
