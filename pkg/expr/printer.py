"""Impresión de expresiones en la misma gramática que acepta el analizador."""
import sympy
from sympy.core.function import AppliedUndef

from expr.services import LOG_RHO


def _rational(value: sympy.Rational) -> str:
    if value.q == 1:
        return str(value.p)
    return f"{value.p}/{value.q}"


def _factor(e) -> str:
    text = to_text(e)
    if isinstance(e, sympy.Add) or (isinstance(e, sympy.Rational) and (e.q != 1 or e < 0)):
        return f"({text})"
    return text


def _power(e: sympy.Pow) -> str:
    base, exponent = e.args
    if isinstance(base, sympy.Symbol) or isinstance(base, AppliedUndef) or base == LOG_RHO:
        base_text = to_text(base)
    else:
        base_text = f"({to_text(base)})"
    if exponent.is_negative:
        return f"{base_text}^({_rational(exponent)})"
    return f"{base_text}^{_rational(exponent)}"


def _product(e: sympy.Expr) -> str:
    coefficient, rest = e.as_coeff_Mul()
    factors = [_factor(f) for f in sympy.Mul.make_args(rest)] if rest != 1 else []
    if coefficient == 1:
        return "*".join(factors) or "1"
    if coefficient == -1 and factors:
        return "-" + "*".join(factors)
    if not factors:
        return _rational(coefficient)
    # p/q*x se relee como (p/q)*x
    return f"{_rational(coefficient)}*" + "*".join(factors)


def to_text(e) -> str:
    e = sympy.sympify(e)
    if e.is_Rational:
        return _rational(e)
    if isinstance(e, sympy.Symbol):
        return e.name
    if e == LOG_RHO:
        return "log(rho)"
    if isinstance(e, AppliedUndef):
        return f"{e.func.__name__}({', '.join(str(a) for a in e.args)})"
    if isinstance(e, sympy.Derivative):
        variables = []
        for variable, count in e.variable_count:
            variables.extend([str(variable)] * int(count))
        return f"D[{e.expr.func.__name__}, {', '.join(variables)}]"
    if isinstance(e, sympy.Add):
        numerator, denominator = sympy.fraction(sympy.together(e))
        if not denominator.is_Rational:
            return f"({to_text(sympy.expand(numerator))})/({to_text(sympy.expand(denominator))})"
        pieces = []
        for term in e.as_ordered_terms():
            text = to_text(term)
            if pieces and text.startswith("-"):
                pieces.append(f"- {text[1:]}")
            elif pieces:
                pieces.append(f"+ {text}")
            else:
                pieces.append(text)
        return " ".join(pieces)
    if isinstance(e, sympy.Pow):
        return _power(e)
    if isinstance(e, sympy.Mul):
        numerator, denominator = sympy.fraction(e)
        if denominator != 1 and not denominator.is_Rational:
            return f"({to_text(numerator)})/({to_text(denominator)})"
        return _product(e)
    return str(e)
