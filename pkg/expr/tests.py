import numpy as np
import sympy
from django.test import SimpleTestCase

from core.errors import (
    ArityError,
    ExprSyntaxError,
    InputError,
    RhoDependenceError,
    SeriesError,
    TruncationError,
    UnboundAtomError,
)
from expr.models import RhoSeries
from expr.parser import parse
from expr.printer import to_text
from expr.services import (
    LOG_RHO,
    RHO,
    diff,
    eval_num,
    function_atom,
    normal,
    rho_coefficients,
    substitute,
    symbol,
    taylor_coefficients,
)

x, y, u, v = sympy.symbols("x y u v")
x1, x2, y1, y2 = sympy.symbols("x1 x2 y1 y2")


def random_polynomial(rng, variables, terms=3, degree=2):
    total = sympy.Integer(0)
    for _ in range(terms):
        monomial = sympy.Rational(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
        for var in variables:
            monomial *= var ** int(rng.integers(0, degree + 1))
        total += monomial
    return total


class ParserTests(SimpleTestCase):
    def test_polinomio_simple(self):
        e = parse("2*x1*y2 - x1^2")
        self.assertEqual(e, 2 * x1 * y2 - x1**2)
        self.assertEqual(len(e.as_ordered_terms()), 2)

    def test_marcador_de_derivada(self):
        e = parse("D[H, y1, y1]", functions={"H": ("y1", "u")})
        H = function_atom("H", ["y1", "u"])
        self.assertEqual(e, sympy.Derivative(H, (y1, 2)))

    def test_forma_normal_unica(self):
        self.assertEqual(parse("x1*(y1+y1)"), parse("2*x1*y1"))
        self.assertEqual(parse("(x+1)^2 - x^2 - 2*x"), 1)

    def test_racionales_y_log(self):
        self.assertEqual(parse("3/4*x - log(rho)"), sympy.Rational(3, 4) * x - LOG_RHO)

    def test_error_de_sintaxis_con_posicion(self):
        with self.assertRaises(ExprSyntaxError) as ctx:
            parse("x1 + * y1")
        self.assertEqual(ctx.exception.position, 5)

    def test_exponente_no_entero(self):
        with self.assertRaises(ExprSyntaxError):
            parse("x^(1/2)")

    def test_division_por_no_constante(self):
        with self.assertRaises(ExprSyntaxError):
            parse("1/z")
        self.assertEqual(parse("1/z^2", fraction=True), 1 / sympy.Symbol("z") ** 2)

    def test_aridad(self):
        with self.assertRaises(ArityError):
            parse("H(y1)", functions={"H": ("y1", "u")})
        with self.assertRaises(ArityError):
            parse("D[F, x]", functions={"H": ("x",)})

    def test_nombre_desnudo_usa_argumentos_declarados(self):
        e = parse("H + 1", functions={"H": ("y1", "u")})
        self.assertEqual(e, function_atom("H", ["y1", "u"]) + 1)

    def test_ida_y_vuelta_por_impresion(self):
        functions = {"H": ("y1", "u")}
        for text in ["2*x1*y2 - x1^2", "D[H, y1, y1]*u - 1/3", "x*log(rho) + H^2", "-x"]:
            e = parse(text, functions=functions)
            self.assertEqual(parse(to_text(e), functions=functions), e)


class DifferentiationTests(SimpleTestCase):
    def test_derivada_basica(self):
        self.assertEqual(diff(x1**2 * y1, x1), 2 * x1 * y1)

    def test_funcion_no_depende_de_v(self):
        H = function_atom("H", ["y", "u"])
        self.assertEqual(diff(H, v), 0)

    def test_variable_no_declarada(self):
        with self.assertRaises(InputError):
            diff(x, "w", coordinates=[x, y])

    def test_clairaut(self):
        rng = np.random.default_rng(7)
        F = function_atom("F", ["x", "u"])
        self.assertEqual(diff(diff(F, x), u), diff(diff(F, u), x))
        for _ in range(20):
            f = random_polynomial(rng, [x, u])
            self.assertEqual(diff(diff(f, x), u), diff(diff(f, u), x))

    def test_derivacion_regla_de_leibniz(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = random_polynomial(rng, [x, y])
            b = random_polynomial(rng, [x, y])
            self.assertEqual(diff(a * b, x), normal(diff(a, x) * b + a * diff(b, x)))


class RingTests(SimpleTestCase):
    def test_distributividad(self):
        rng = np.random.default_rng(20240601)
        for _ in range(1000):
            a, b, c = (random_polynomial(rng, [x, y], terms=2, degree=1) for _ in range(3))
            self.assertEqual(normal(a * (b + c)), normal(a * b + a * c))


class SubstitutionTests(SimpleTestCase):
    def test_simultanea(self):
        self.assertEqual(substitute(x + y, {"x": 1, "y": 2}), 3)
        self.assertEqual(substitute(x + 2 * y, {x: y, y: x}), y + 2 * x)

    def test_identidad(self):
        e = x1**2 - x2
        self.assertEqual(substitute(e, {}), e)

    def test_coeficientes_por_dos_caminos(self):
        e = 3 * RHO**2 + x * RHO + x**2
        series = rho_coefficients(e)
        coefficients = taylor_coefficients(e, 3)
        for k in range(4):
            self.assertEqual(series.coefficient(k), coefficients[k])


class RhoCoefficientTests(SimpleTestCase):
    def test_polinomio_en_rho(self):
        series = rho_coefficients(3 * RHO**2 + x * RHO, 4)
        self.assertEqual(series.terms, {(1, 0): x, (2, 0): 3})
        self.assertEqual(series.truncation, sympy.Rational(9, 2))

    def test_orden_maximo_incluido(self):
        e = x * RHO + 3 * RHO**2 + y * RHO ** sympy.Rational(5, 2) + RHO**3
        self.assertEqual(rho_coefficients(e, 2).terms, {(1, 0): x, (2, 0): 3})
        series = rho_coefficients(e, sympy.Rational(5, 2))
        self.assertEqual(series.coefficient(sympy.Rational(5, 2)), y)
        self.assertEqual(series.truncation, 3)
        self.assertEqual(rho_coefficients(e, 3).coefficient(3), 1)

    def test_rama_logaritmica(self):
        DH = sympy.Symbol("DH")
        series = rho_coefficients(RHO**2 * LOG_RHO * DH)
        self.assertEqual(series.coefficient(2, 1), DH)
        self.assertEqual(series.coefficient(2, 0), 0)

    def test_exponente_semientero(self):
        series = rho_coefficients(x * RHO ** sympy.Rational(5, 2))
        self.assertEqual(series.coefficient(sympy.Rational(5, 2)), x)

    def test_rho_dentro_de_funcion(self):
        with self.assertRaises(RhoDependenceError):
            rho_coefficients(sympy.Function("H")(RHO))

    def test_ida_y_vuelta(self):
        e = x * RHO + RHO**3 * y - 2
        self.assertEqual(rho_coefficients(rho_coefficients(e).to_expr()), rho_coefficients(e))


class EvalTests(SimpleTestCase):
    def test_valor(self):
        self.assertEqual(eval_num(x1**2 - x2, {"x1": 2.0, "x2": 1.0}), 3.0)

    def test_cero(self):
        self.assertEqual(eval_num(sympy.Integer(0)), 0.0)

    def test_atomo_sin_valor(self):
        H = function_atom("H", ["x"])
        with self.assertRaises(UnboundAtomError):
            eval_num(H * x, {"x": 1.0})
        self.assertAlmostEqual(eval_num(H * x + diff(H, x), {"x": 2.0}, {H: 3.0, diff(H, x): 1.0}), 7.0)

    def test_normalizada_igual_a_cruda(self):
        raw = (x + 2) * (x - y) ** 2
        point = {"x": 0.3, "y": -0.7}
        naive = (0.3 + 2) * (0.3 + 0.7) ** 2
        self.assertAlmostEqual(eval_num(normal(raw), point), naive, delta=1e-12 * max(1.0, abs(naive)))


class RhoSeriesTests(SimpleTestCase):
    def test_truncacion_del_producto(self):
        a = RhoSeries.build({(1, 0): x}, 3)
        b = RhoSeries.build({(0, 0): 1, (1, 0): y}, 2)
        product = a * b
        self.assertEqual(product.truncation, 3)
        self.assertEqual(product.coefficient(2), x * y)

    def test_derivada_con_log(self):
        series = RhoSeries.monomial(x, 2, 1)
        derivative = series.diff_rho()
        self.assertEqual(derivative.coefficient(1, 1), 2 * x)
        self.assertEqual(derivative.coefficient(1, 0), x)

    def test_desplazamiento(self):
        series = RhoSeries.build({(0, 0): x}, 2).shift(sympy.Rational(1, 2))
        self.assertEqual(series.coefficient(sympy.Rational(1, 2)), x)
        self.assertEqual(series.truncation, sympy.Rational(5, 2))

    def test_log_cuadrado_rechazado(self):
        series = RhoSeries.monomial(1, 1, 1)
        with self.assertRaises(SeriesError):
            series * series

    def test_coeficiente_desconocido(self):
        with self.assertRaises(TruncationError):
            RhoSeries.zero(2).coefficient(2)

    def test_escalares_se_promueven(self):
        series = 1 + RhoSeries.monomial(x, 1)
        self.assertEqual((2 * series).coefficient(0), 2)
        self.assertEqual(symbol("rho"), RHO)
