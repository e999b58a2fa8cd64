"""
Analizador descendente recursivo de la gramática de expresiones.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' unary) | ('/' unary))*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | IDENT ['(' IDENT (',' IDENT)* ')']
            | 'D' '[' IDENT (',' IDENT)+ ']' | 'log' '(' 'rho' ')' | '(' expr ')'

- Solo se divide por constantes (racionales p/q), salvo en modo fracción
  (entradas de métricas), donde se aceptan cocientes y exponentes negativos.
- Los exponentes deben ser enteros.
"""
import re
from dataclasses import dataclass

import sympy

from core.errors import ArityError, ExprSyntaxError, InputError
from expr.services import LOG_RHO, RHO, function_atom, normal, symbol

TOKEN_RE = re.compile(r"\s*(?:(?P<number>\d+)|(?P<ident>[a-zA-Z][a-zA-Z0-9]*)|(?P<op>[-+*/^()\[\],]))")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    position: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = TOKEN_RE.match(text, position)
        if not match:
            offset = position + (len(text[position:]) - len(text[position:].lstrip()))
            raise ExprSyntaxError(f"Carácter inesperado {text[offset]!r}", text, offset)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), start))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, variables, functions, fraction):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0
        self.variables = None if variables is None else set(variables)
        self.functions = functions
        self.fraction = fraction

    # -- utilidades ---------------------------------------------------------
    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _error(self, message, token=None):
        token = token or self.current
        return ExprSyntaxError(message, self.text, token.position)

    def _accept(self, value) -> bool:
        if self.current.kind == "op" and self.current.value == value:
            self.index += 1
            return True
        return False

    def _expect(self, value):
        if not self._accept(value):
            found = self.current.value or "fin de texto"
            raise self._error(f"Se esperaba '{value}' y se encontró '{found}'")

    def _identifier(self) -> Token:
        token = self.current
        if token.kind != "ident":
            raise self._error("Se esperaba un identificador")
        self.index += 1
        return token

    # -- gramática ----------------------------------------------------------
    def parse(self):
        value = self.expr()
        if self.current.kind != "end":
            raise self._error(f"Símbolo sobrante '{self.current.value}'")
        return value

    def expr(self):
        value = self.term()
        while True:
            if self._accept("+"):
                value = value + self.term()
            elif self._accept("-"):
                value = value - self.term()
            else:
                return value

    def term(self):
        value = self.unary()
        while True:
            if self._accept("*"):
                value = value * self.unary()
            elif self.current.kind == "op" and self.current.value == "/":
                token = self.current
                self.index += 1
                divisor = self.unary()
                if divisor == 0:
                    raise self._error("División por cero", token)
                if not self.fraction and not divisor.is_Rational:
                    raise self._error("Solo se admite división por constantes", token)
                value = value / divisor
            else:
                return value

    def unary(self):
        if self._accept("-"):
            return -self.unary()
        if self._accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.current.kind == "op" and self.current.value == "^":
            token = self.current
            self.index += 1
            exponent = self.unary()
            if not exponent.is_Integer:
                raise self._error("El exponente debe ser entero", token)
            if exponent < 0 and not self.fraction:
                raise self._error("Exponente negativo fuera de una entrada de métrica", token)
            return base**exponent
        return base

    def atom(self):
        token = self.current
        if token.kind == "number":
            self.index += 1
            return sympy.Integer(int(token.value))
        if self._accept("("):
            value = self.expr()
            self._expect(")")
            return value
        if token.kind == "ident":
            if token.value == "D" and self.tokens[self.index + 1].value == "[":
                return self._derivative()
            if token.value == "log" and self.tokens[self.index + 1].value == "(":
                return self._log()
            return self._name()
        found = token.value or "fin de texto"
        raise self._error(f"Símbolo inesperado '{found}'")

    def _log(self):
        self.index += 1
        self._expect("(")
        argument = self._identifier()
        if argument.value != "rho":
            raise self._error("log solo admite el argumento rho", argument)
        self._expect(")")
        return LOG_RHO

    def _derivative(self):
        self.index += 1
        self._expect("[")
        name = self._identifier()
        atom = self._declared_function(name)
        variables = []
        while self._accept(","):
            variables.append(self._variable(self._identifier()))
        self._expect("]")
        if not variables:
            raise self._error("D[...] necesita al menos una variable", name)
        return sympy.diff(atom, *variables)

    def _name(self):
        token = self._identifier()
        is_call = self.current.kind == "op" and self.current.value == "("
        known = self.functions is not None and token.value in self.functions
        if not is_call and not known:
            return self._variable(token)
        if not is_call:
            return self._declared_function(token)

        self.index += 1
        arguments = [self._identifier().value]
        while self._accept(","):
            arguments.append(self._identifier().value)
        self._expect(")")
        if self.functions is None:
            return function_atom(token.value, arguments)
        declared = self.functions.get(token.value)
        if declared is None:
            raise ArityError(f"Función desconocida '{token.value}' (posición {token.position})", witness=token.value)
        if tuple(arguments) != tuple(declared):
            raise ArityError(
                f"'{token.value}' se declaró con argumentos ({', '.join(declared)}) "
                f"y se usó con ({', '.join(arguments)}) (posición {token.position})",
                witness=token.value,
            )
        return function_atom(token.value, declared)

    def _declared_function(self, token):
        if self.functions is None or token.value not in self.functions:
            raise ArityError(f"Función desconocida '{token.value}' (posición {token.position})", witness=token.value)
        return function_atom(token.value, self.functions[token.value])

    def _variable(self, token):
        if token.value == "rho":
            return RHO
        if self.variables is not None and token.value not in self.variables:
            raise InputError(f"Variable no declarada '{token.value}' (posición {token.position})")
        return symbol(token.value)


def parse(text: str, variables=None, functions=None, fraction: bool = False) -> sympy.Expr:
    """
    Convierte texto en una expresión normalizada.
    - variables: nombres admitidos (None = cualquiera).
    - functions: {nombre: (argumentos declarados)}.
    - fraction: admite cocientes generales (entradas de métricas).
    """
    return normal(_Parser(text, variables, functions, fraction).parse())
