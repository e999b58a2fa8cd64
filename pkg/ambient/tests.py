import itertools

import numpy as np
import sympy
from django.test import SimpleTestCase, override_settings

from core.errors import DimensionError, InputError, ObstructedError, PreconditionError, TruncationError
from core.models import all_passed, failed
from expr.models import RhoSeries
from expr.services import RHO, function_atom, normal
from frame.models import FrameData, SemidirectAlgebra
from frame.semidirect import build_semidirect, realize_nilpotent
from tensor.models import Metric, TensorField
from tensor.services import bach, metric_tensor, ricci, schouten

from ambient.closed_forms import (
    d_operator,
    delta_minus,
    einstein_ambient,
    flat_laplacian,
    gpp_preconditions,
    gpp_wave_frame,
    gpp_wave_metric,
    homogeneous_branch,
    left_invariant_ambient,
    middle_laplacian,
    ppwave_ambient,
    ppwave_obstruction,
    series_solution,
)
from ambient.constants import (
    BACH_RATIO_N4,
    PUBLISHED_RATIO_N4,
    nrw_box_c,
    ppwave_log_c,
    ppwave_q,
    sol_denominator,
)
from ambient.equations import ambient_ricci_direct, compare_residuals, fg_residuals, residual_blocks
from ambient.expansion import (
    ambient_from_coefficients,
    default_order,
    expand_generic,
    first_order_check,
    mu_relation,
    nrw_coefficient_audit,
    nrw_linear_coefficients,
    nrw_obstruction,
    obstruction,
)
from ambient.models import AmbientMetric
from ambient.nilpotent import (
    involutive_check,
    linear_operator_A,
    linear_ricci_term,
    nilpotent_ricci,
    quad_residual,
    quad_vs_fg,
    ricci_by_degree,
)

x1, x2, y1, y2 = sympy.symbols("x1 x2 y1 y2")
x, y, z = sympy.symbols("x y z")
v, u, y3 = sympy.symbols("v u y3")

NEUTRAL = [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]


def sig22_metric():
    return Metric.from_matrix(
        [x1, x2, y1, y2],
        [
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [1, 0, 2 * x1**2, -4 * x1 * x2],
            [0, 1, -4 * x1 * x2, 2 * x2**2],
        ],
        name="sig22",
    )


def sig22_pattern():
    """(x1 dy1)^2 - 4 x1 x2 dy1 dy2 + (x2 dy2)^2 como tensor simétrico."""
    values = {(2, 2): x1**2, (2, 3): -2 * x1 * x2, (3, 3): x2**2}
    return TensorField.from_function(("d", "d"), 4, lambda i, j: values.get((min(i, j), max(i, j)), 0))


def hyperbolic3():
    factor = 1 / z**2
    return Metric.from_matrix([x, y, z], sympy.diag(factor, factor, factor).tolist(), name="H3")


def flat(n):
    coords = sympy.symbols(f"x0:{n}")
    return Metric.from_matrix(coords, sympy.eye(n).tolist(), name="plana")


def ppwave4():
    H = function_atom("H", ["y1", "y2", "u"])
    g = gpp_wave_metric([v, y1, y2, u], [[H]], sympy.eye(2), 1, functions={"H": ("y1", "y2", "u")}, name="pp-onda")
    return g, H


def ppwave5(H):
    return [v, y1, y2, y3, u], gpp_wave_metric([v, y1, y2, y3, u], [[H]], sympy.eye(3), 1, name="pp-onda-5")


def heisenberg_frame():
    S = SemidirectAlgebra(
        p=1,
        q=3,
        k_brackets={(1, 2): {0: 1}},
        action={(3, 1): {1: 1}, (3, 2): {2: 1}, (3, 0): {0: 2}},
        g_null_dual=((1,),),
        g_middle=((1, 0), (0, 1)),
        name="heisenberg-semidirecto",
    )
    return build_semidirect(S)


def heisenberg_frame_5():
    # producto con una recta central en el bloque medio
    S = SemidirectAlgebra(
        p=1,
        q=4,
        k_brackets={(1, 2): {0: 1}},
        action={(4, 1): {1: 1}, (4, 2): {2: 1}, (4, 0): {0: 2}},
        g_null_dual=((1,),),
        g_middle=((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        name="heisenberg-semidirecto-5",
    )
    return build_semidirect(S)


def heisenberg_nilpotent_5():
    """[e1, e2] = e0 sin acción de e4, realizado en coordenadas x1..x5."""
    S = SemidirectAlgebra(
        p=1,
        q=4,
        k_brackets={(1, 2): {0: 1}},
        g_null_dual=((1,),),
        g_middle=((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        name="heisenberg-5",
    )
    return realize_nilpotent(build_semidirect(S))


def random_polynomial(rng, variables, terms=4, degree=5):
    total = sympy.Integer(0)
    for _ in range(terms):
        monomial = sympy.Integer(int(rng.integers(-4, 5)))
        for _ in range(int(rng.integers(1, degree + 1))):
            monomial *= variables[int(rng.integers(0, len(variables)))]
        total += monomial
    return normal(total)


class ResidualTests(SimpleTestCase):
    def test_plana_sin_perturbacion(self):
        ambient = AmbientMetric.trivial(flat(3))
        residuals = fg_residuals(ambient, 3)
        self.assertTrue(residuals.vanish())

    def test_h_no_nula_en_rho_cero(self):
        g = flat(3)
        with self.assertRaises(InputError):
            AmbientMetric.build(g, [[1 if i == j else 0 for j in range(3)] for i in range(3)])

    def test_truncacion_insuficiente(self):
        ambient = AmbientMetric.build(flat(3), [[0] * 3 for _ in range(3)], truncation=2)
        with self.assertRaises(TruncationError):
            fg_residuals(ambient, 2)

    def test_primer_orden_con_2P(self):
        g = hyperbolic3()
        P = schouten(g)
        ambient = AmbientMetric.build(g, [[2 * RHO * P[i, j] for j in range(3)] for i in range(3)])
        checks = {check.name: check for check in fg_residuals(ambient, 1).checks()}
        self.assertTrue(checks["E1 = O(rho^1)"].passed)

    def test_sig22_bloque_del_ricci_ambiente(self):
        g = sig22_metric()
        Ric = ricci(g)
        ambient = AmbientMetric.build(g, [[RHO * Ric[i, j] for j in range(4)] for i in range(4)])
        self.assertTrue(fg_residuals(ambient, 1).vanish())

        checks = {check.name: check for check in fg_residuals(ambient, 2).checks()}
        e1 = checks["E1 = O(rho^2)"]
        self.assertFalse(e1.passed)
        self.assertEqual(e1.witness, ((2, 2), 1, 0, 144 * x1**2))

        # Ric(g~)|_{TM x TM} = rho (3 rho - 1) O con la normalización publicada
        E1, E2, E3 = residual_blocks(ambient_ricci_direct(ambient), 4)
        published = sig22_pattern().scale(-144)
        for i, j in itertools.product(range(4), repeat=2):
            self.assertEqual(normal(E1[i, j] - RHO * (3 * RHO - 1) * published[i, j]), 0)

    def test_doble_camino(self):
        g = sig22_metric()
        Ric = ricci(g)
        ambient = AmbientMetric.build(g, [[RHO * Ric[i, j] for j in range(4)] for i in range(4)])
        residuals = fg_residuals(ambient, 2)
        self.assertIsNone(compare_residuals(residuals, ambient_ricci_direct(ambient, order=2)))

    def test_directo_rechaza_logaritmos(self):
        g = flat(4)
        rows = [[0] * 4 for _ in range(4)]
        rows[0][0] = RhoSeries.monomial(1, 2, log_power=1)
        ambient = AmbientMetric.build(g, rows)
        with self.assertRaises(InputError):
            ambient_ricci_direct(ambient)


class ExpansionTests(SimpleTestCase):
    def test_orden_por_defecto(self):
        self.assertEqual(default_order(5), 10)
        self.assertEqual(default_order(6), 2)

    def test_plana(self):
        ambient = expand_generic(flat(3), 3)
        for k in (1, 2, 3):
            self.assertTrue(ambient.coefficient(k).is_zero())

    def test_primer_orden_cinco_metricas(self):
        pp, _ = ppwave4()
        metrics = [flat(3), pp, sig22_metric(), hyperbolic3(), heisenberg_frame().metric]
        for g in metrics:
            ambient = expand_generic(g, 1)
            check = first_order_check(g, ambient)
            self.assertTrue(check.passed, (g.name, check.witness))

    def test_relacion_mu_n3(self):
        g = Metric.from_matrix([x, y, z], [[1, 0, 0], [0, 1, 0], [0, 0, 1 + x**2]], name="n3")
        ambient = expand_generic(g, 2)
        self.assertTrue(mu_relation(g, ambient).passed)
        self.assertTrue(fg_residuals(ambient, 2).vanish())

    def test_relacion_mu_n5(self):
        _, g = ppwave5(y1**2 * y2**2 + y3**4)
        ambient = expand_generic(g, 2)
        check = mu_relation(g, ambient)
        self.assertTrue(check.passed, check.witness)

    def test_einstein_por_expansion(self):
        g = hyperbolic3()
        ambient = expand_generic(g, 4)
        self.assertTrue(ambient.coefficient(1).equals(metric_tensor(g).scale(-1)))
        self.assertTrue(ambient.coefficient(2).equals(metric_tensor(g).scale(sympy.Rational(1, 4))))
        self.assertTrue(ambient.coefficient(3).is_zero())
        self.assertTrue(ambient.coefficient(4).is_zero())

    def test_barrera_par_sin_eleccion(self):
        g = flat(4)
        with self.assertRaises(ObstructedError) as ctx:
            expand_generic(g, 2)
        self.assertTrue(ctx.exception.obstruction.is_zero())

    def test_barrera_par_con_eleccion(self):
        g = flat(4)
        choice = [[0] * 4 for _ in range(4)]
        choice[0][1] = choice[1][0] = 1
        ambient = expand_generic(g, 3, even_choice=choice)
        self.assertEqual(ambient.coefficient(2)[0, 1], 1)
        self.assertTrue(fg_residuals(ambient, 3).vanish())

    def test_obstruccion_no_nula_detiene(self):
        with self.assertRaises(ObstructedError) as ctx:
            expand_generic(sig22_metric(), 2)
        self.assertFalse(ctx.exception.obstruction.is_zero())


class ObstructionTests(SimpleTestCase):
    def test_sig22(self):
        O = obstruction(sig22_metric())
        self.assertTrue(all_passed(O.checks), [str(c) for c in failed(O.checks)])
        self.assertTrue(O.tensor.equals(sig22_pattern().scale(144)))
        self.assertTrue(O.renormalized(PUBLISHED_RATIO_N4).value.equals(sig22_pattern().scale(-144)))

    def test_bach_proporcional(self):
        g = sig22_metric()
        self.assertTrue(bach(g).equals(obstruction(g).tensor.scale(BACH_RATIO_N4)))

    @override_settings(AMBIENTFORGE_OBSTRUCTION_NORM="-1")
    def test_normalizacion_configurable(self):
        O = obstruction(sig22_metric())
        self.assertEqual(O.value[2, 2], -144 * x1**2)

    def test_dimension_impar(self):
        with self.assertRaises(DimensionError):
            obstruction(hyperbolic3())

    def test_conformemente_plana(self):
        g = Metric.from_matrix(
            sympy.symbols("x0:4"), sympy.diag(*([1 / (1 + sympy.Symbol("x0") ** 2)] * 4)).tolist()
        )
        self.assertTrue(obstruction(g).is_zero())

    def test_ppwave_n4(self):
        g, H = ppwave4()
        O = obstruction(g)
        laplacian2 = sympy.diff(H, y1, 4) + 2 * sympy.diff(H, y1, 2, y2, 2) + sympy.diff(H, y2, 4)
        self.assertEqual(O.tensor[3, 3], normal(laplacian2 / 4))
        self.assertEqual(len(O.tensor.nonzero_items()), 1)
        closed = ppwave_obstruction([v, y1, y2, u], [[H]], sympy.eye(2), 1)
        self.assertEqual(closed[0, 0], O.tensor[3, 3])

    def test_nrw_box(self):
        g, _ = ppwave4()
        self.assertEqual(nrw_box_c(4), sympy.Rational(-1, 2))
        self.assertTrue(nrw_obstruction(g).equals(obstruction(g).tensor))


class NilpotentTests(SimpleTestCase):
    def _direct(self, g0, h):
        rows = [[g0.g(i, j) + h[i, j] for j in range(g0.n)] for i in range(g0.n)]
        return ricci(g0.with_components(rows, name="g0 + h"))

    def test_h_nula(self):
        g = sig22_metric()
        result = nilpotent_ricci(g, TensorField.zeros(("d", "d"), 4))
        self.assertTrue(result.ricci.equals(ricci(g)))
        self.assertTrue(all(result.vanishing().values()))

    def test_ppwave_lineal(self):
        g0 = gpp_wave_metric([v, y1, y2, u], [[0]], sympy.eye(2), 1)
        f = function_atom("f", ["y1", "y2", "u"])
        h = TensorField.from_function(("d", "d"), 4, lambda i, j: f if (i, j) == (3, 3) else 0)
        result = nilpotent_ricci(g0, h, null_indices=[0])
        self.assertTrue(all_passed(result.hypotheses), [str(c) for c in failed(result.hypotheses)])
        self.assertTrue(all_passed(result.checks), [str(c) for c in failed(result.checks)])
        self.assertTrue(all(result.vanishing().values()))
        self.assertTrue(result.ricci.equals(self._direct(g0, h)))

    def test_sig22_no_lineal(self):
        g0 = Metric.from_matrix([x1, x2, y1, y2], NEUTRAL)
        g = sig22_metric()
        h = TensorField.from_function(("d", "d"), 4, lambda i, j: g.g(i, j) - g0.g(i, j))
        result = nilpotent_ricci(g0, h, null_indices=[0, 1])
        self.assertTrue(result.ricci.equals(ricci(g)))
        vanishing = result.vanishing()
        self.assertFalse(vanishing[2])
        self.assertTrue(vanishing[3] and vanishing[4])
        self.assertTrue(result.linear.is_zero())
        hypotheses = {c.name: c.passed for c in result.hypotheses}
        self.assertTrue(hypotheses["K = N⊥ involutivo"])
        self.assertFalse(hypotheses["div h = 0"])
        self.assertFalse(hypotheses["L_Y h = 0 (Y ∈ N)"])
        self.assertTrue(all_passed(result.checks), [str(c) for c in failed(result.checks)])

    def test_heisenberg_en_marco(self):
        g0 = heisenberg_frame().metric
        h = TensorField.from_function(("d", "d"), 4, lambda i, j: 3 if (i, j) == (3, 3) else 0)
        result = nilpotent_ricci(g0, h, null_indices=[0])
        self.assertTrue(result.ricci.equals(self._direct(g0, h)))
        self.assertTrue(all_passed(result.hypotheses), [str(c) for c in failed(result.hypotheses)])
        self.assertTrue(all(result.vanishing().values()))

    def test_partes_por_grado(self):
        g0 = Metric.from_matrix([x1, x2, y1, y2], NEUTRAL)
        h = TensorField.from_function(
            ("d", "d"), 4, lambda i, j: {(2, 2): x1 * y2, (3, 3): x2**2}.get((i, j), 0)
        )
        graded = ricci_by_degree(g0, h)
        total = ricci(g0)
        for r in range(1, 5):
            total = total + graded[r]
        self.assertTrue(total.equals(self._direct(g0, h)))
        self.assertTrue(graded[1].equals(linear_ricci_term(g0, h)))

    def test_aleatorias(self):
        rng = np.random.default_rng(20240601)
        g0 = Metric.from_matrix([x1, x2, y1, y2], NEUTRAL)
        for _ in range(2):
            block = {}
            for i, j in itertools.combinations_with_replacement((2, 3), 2):
                block[(i, j)] = random_polynomial(rng, [x1, x2], terms=2, degree=3)
            h = TensorField.from_function(
                ("d", "d"), 4, lambda i, j: block.get((min(i, j), max(i, j)), 0)
            )
            result = nilpotent_ricci(g0, h)
            self.assertTrue(result.ricci.equals(self._direct(g0, h)))

    def test_imagen_no_nula(self):
        g = sig22_metric()
        with self.assertRaises(PreconditionError):
            nilpotent_ricci(g, metric_tensor(g))

    def test_K_no_involutivo(self):
        r = [[[0] * 4 for _ in range(4)] for _ in range(4)]
        r[3][1][2], r[3][2][1] = 1, -1
        gframe = [[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]]
        check = involutive_check(FrameData.from_structure(gframe, r, p=1).metric, [0])
        self.assertFalse(check.passed)
        self.assertEqual(check.witness[:3], (1, 2, 0))
        self.assertTrue(involutive_check(Metric.from_matrix([x1, x2, y1, y2], NEUTRAL), [0, 1]).passed)


class LinearOperatorTests(SimpleTestCase):
    def test_cero(self):
        g, _ = ppwave4()
        A = linear_operator_A(g, TensorField.zeros(("d", "d"), 4))
        self.assertTrue(A.is_zero())

    def test_reduce_a_menos_box(self):
        g, _ = ppwave4()
        h = TensorField.from_function(("d", "d"), 4, lambda i, j: y1**2 * u if (i, j) == (3, 3) else 0)
        A = linear_operator_A(g, h)
        self.assertTrue((A[3, 3] - RhoSeries.constant(-2 * u)).is_zero_series())

    def test_residuo_cuadratico_plana(self):
        g = gpp_wave_metric([v, y1, y2, u], [[0]], sympy.eye(2), 1)
        residual = quad_residual(g, TensorField.zeros(("d", "d"), 4), null_indices=[0])
        self.assertTrue(residual.is_zero())

    def test_residuo_cuadratico_hipotesis(self):
        g = sig22_metric()
        with self.assertRaises(PreconditionError) as ctx:
            quad_residual(g, metric_tensor(g), null_indices=[0, 1])
        self.assertEqual(ctx.exception.relation, "Im h ⊂ N")

    def test_equivalencia_con_fg(self):
        coords, g = ppwave5(y1**2 * y2**2 + y3**4)
        ambient = ppwave_ambient(coords, [[y1**2 * y2**2 + y3**4]], sympy.eye(3), 1, truncation=5)
        checks = quad_vs_fg(ambient, 4, null_indices=[0])
        self.assertTrue(all_passed(checks), [str(c) for c in failed(checks)])


class SolutionOperatorTests(SimpleTestCase):
    def test_constantes(self):
        self.assertEqual(ppwave_log_c(4), sympy.Rational(-1, 8))
        q0 = sympy.Symbol("q0")
        self.assertEqual(normal(ppwave_q(1, 4, q0) - q0), sympy.Rational(4, 3))
        self.assertEqual(sol_denominator(2, 5, -1), 2 * (2 - 5) * (4 - 5))

    def test_delta_menos_lineal_en_rho(self):
        D = flat_laplacian([y1, y2, y3])
        C = sympy.Symbol("C")
        result = delta_minus(D, RhoSeries.monomial(C / 3, 1), 5)
        self.assertTrue((result - RhoSeries.constant(-C)).is_zero_series())
        self.assertTrue(delta_minus(D, RhoSeries.constant(7), 5).is_zero_series())

    def test_identidades(self):
        rng = np.random.default_rng(20240601)
        for n, variables in ((4, [y1, y2]), (5, [y1, y2, y3])):
            D = flat_laplacian(variables)
            half = sympy.Rational(n, 2)
            for _ in range(2):
                F = random_polynomial(rng, variables)
                plus = series_solution(F, D, n, 1, 8)
                # D_+(F_+) = D F
                lhs = d_operator(plus, D, n, 1)
                self.assertTrue((lhs - RhoSeries.constant(D(F))).is_zero_series())
                # D_-(rho^{n/2} f) = rho^{n/2} D_+(f)
                f = plus + RhoSeries.constant(F, 8)
                lhs = delta_minus(D, f.shift(half), n)
                rhs = d_operator(f, D, n, 1).shift(half)
                self.assertTrue((lhs - rhs).is_zero_series())
                # D_-(rho^{n/2}(F + F_+)) = 0
                self.assertTrue(delta_minus(D, homogeneous_branch(F, D, n, 8 + half), n).is_zero_series())

    def test_barrera_signo_menos(self):
        D = flat_laplacian([y1, y2])
        with self.assertRaises(PreconditionError):
            series_solution(y1**4, D, 4, -1, 8)
        self.assertTrue(series_solution(y1**3, D, 4, -1, 8).terms)

    def test_DF_nula(self):
        D = flat_laplacian([y1, y2])
        self.assertTrue(series_solution(y1 * y2, D, 5, 1, 8).is_zero_series())


class PPWaveTests(SimpleTestCase):
    H5 = y1**2 * y2**2 + y3**4

    def test_precondiciones(self):
        checks = gpp_preconditions([v, y1, y2, u], [[v * y1]], sympy.eye(2), 1)
        self.assertFalse(checks[0].passed)
        with self.assertRaises(PreconditionError):
            ppwave_ambient([v, y1, y2, u], [[v * y1]], sympy.eye(2), 1)

    def test_marco_gpp(self):
        H = y1**2 + u * y2
        F = gpp_wave_frame([v, y1, y2, u], [[H]], sympy.eye(2), 1)
        self.assertTrue(ricci(F.metric).equals(ricci(gpp_wave_metric([v, y1, y2, u], [[H]], sympy.eye(2), 1))))

    def test_n5_coeficientes_y_residuos(self):
        coords, g = ppwave5(self.H5)
        ambient = ppwave_ambient(coords, [[self.H5]], sympy.eye(3), 1, truncation=7)
        laplacian = 2 * y2**2 + 2 * y1**2 + 12 * y3**2
        self.assertEqual(ambient.coefficient(1)[4, 4], normal(-laplacian / 3))
        self.assertTrue(fg_residuals(ambient, 6).vanish())
        expansion = expand_generic(g, 6)
        for k in range(1, 7):
            self.assertTrue(expansion.coefficient(k).equals(ambient.coefficient(k)), k)

    def test_armonica_sin_alpha(self):
        coords, _ = ppwave5(y1 * y2)
        ambient = ppwave_ambient(coords, [[y1 * y2]], sympy.eye(3), 1, truncation=7)
        self.assertTrue(ambient.h.is_zero())

    def test_n4_familia_analitica(self):
        coords = [v, y1, y2, u]
        ambient = ppwave_ambient(coords, [[y1**3]], sympy.eye(2), 1, alpha=[[y1**2 * y2 + u * y2]], truncation=7)
        self.assertTrue(fg_residuals(ambient, 6).vanish())

    def test_n4_obstruida(self):
        coords = [v, y1, y2, u]
        with self.assertRaises(ObstructedError) as ctx:
            ppwave_ambient(coords, [[y1**4]], sympy.eye(2), 1)
        self.assertEqual(ctx.exception.obstruction[0, 0], 6)

    def test_n4_rama_logaritmica(self):
        coords = [v, y1, y2, u]
        ambient = ppwave_ambient(coords, [[y1**4]], sympy.eye(2), 1, log_branch=True, truncation=5)
        self.assertEqual(ambient.coefficient(1)[3, 3], -6 * y1**2)
        self.assertEqual(ambient.coefficient(2, 1)[3, 3], -3)
        self.assertTrue(ambient.has_logs())
        self.assertTrue(fg_residuals(ambient, 4).vanish())


class LeftInvariantTests(SimpleTestCase):
    def test_heisenberg_n4(self):
        F = heisenberg_frame()
        ambient = left_invariant_ambient(F)
        self.assertTrue(ambient.coefficient(1).equals(ricci(F.metric)))
        self.assertTrue(fg_residuals(ambient, 6).vanish())

    def test_heisenberg_n5_con_F_armonica(self):
        F = heisenberg_frame_5()
        ambient = left_invariant_ambient(F, F_funcs=[[5]])
        self.assertEqual(ambient.h[4, 4].coefficient(sympy.Rational(5, 2)), 5)
        self.assertTrue(fg_residuals(ambient, 6).vanish())

    def test_n5_con_F_lineal_en_el_bloque_medio(self):
        F = heisenberg_nilpotent_5()
        x3_, x4_ = F.coords[2], F.coords[3]
        harmonic = x3_ + 2 * x4_
        self.assertEqual(middle_laplacian(F)(harmonic), 0)
        ambient = left_invariant_ambient(F, F_funcs=[[harmonic]])
        self.assertEqual(normal(ambient.h[4, 4].coefficient(sympy.Rational(5, 2)) - harmonic), 0)
        self.assertEqual(ambient.h[4, 4].coefficient(sympy.Rational(7, 2)), 0)
        expected = ricci(F.metric).scale(sympy.Rational(2, 3))
        self.assertFalse(expected.is_zero())
        self.assertTrue(ambient.coefficient(1).equals(expected))
        self.assertTrue(fg_residuals(ambient, 6).vanish())

    def test_abeliano(self):
        r = [[[0] * 4 for _ in range(4)] for _ in range(4)]
        gframe = [[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]]
        ambient = left_invariant_ambient(FrameData.from_structure(gframe, r, p=1))
        self.assertTrue(ambient.h.is_zero())

    def test_no_walker(self):
        r = [[[0] * 4 for _ in range(4)] for _ in range(4)]
        r[2][0][1], r[2][1][0] = 1, -1
        gframe = [[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]]
        with self.assertRaises(PreconditionError):
            left_invariant_ambient(FrameData.from_structure(gframe, r, p=1))


class EinsteinTests(SimpleTestCase):
    def test_hiperbolico_exacto(self):
        g = hyperbolic3()
        ambient = einstein_ambient(g, -2)
        self.assertTrue(ambient.is_exact)
        self.assertTrue(ambient.coefficient(1).equals(metric_tensor(g).scale(-1)))
        self.assertTrue(ambient_ricci_direct(ambient).is_zero())

    def test_plana(self):
        self.assertTrue(einstein_ambient(flat(3), 0).h.is_zero())

    def test_no_einstein(self):
        with self.assertRaises(PreconditionError):
            einstein_ambient(hyperbolic3(), 1)


class AuditTests(SimpleTestCase):
    def test_ppwave_n5(self):
        coords, g = ppwave5(PPWaveTests.H5)
        ambient = expand_generic(g, 6)
        checks = nrw_coefficient_audit(g, ambient, 6, null_indices=[0])
        self.assertTrue(all_passed(checks), [str(c) for c in failed(checks)])

    def test_ppwave_n4_obstruccion(self):
        g, _ = ppwave4()
        checks = nrw_coefficient_audit(g, expand_generic(g, 1), 1, null_indices=[0])
        self.assertTrue(all_passed(checks), [str(c) for c in failed(checks)])
        self.assertEqual(checks[-1].name, "Im O ⊂ N")

    def test_entrada_en_K(self):
        g, _ = ppwave4()
        bad = TensorField.from_function(("d", "d"), 4, lambda i, j: 1 if (i, j) == (1, 1) else 0)
        checks = {c.name: c for c in nrw_coefficient_audit(g, ambient_from_coefficients(g, [bad]), 1, [0], False)}
        self.assertFalse(checks["Im g^(1) ⊂ N"].passed)

    def test_no_walker_rechazada(self):
        g = Metric.from_matrix([x, y, z], [[y, 0, 1], [0, 1, 0], [1, 0, 0]], name="no-walker")
        ambient = ambient_from_coefficients(g, [TensorField.zeros(("d", "d"), 3)])
        with self.assertRaises(PreconditionError) as ctx:
            nrw_coefficient_audit(g, ambient, 1, null_indices=[0])
        self.assertEqual(ctx.exception.relation, "span(d_a) paralelo")

    def test_recursion_lineal(self):
        coords, g = ppwave5(PPWaveTests.H5)
        linear = nrw_linear_coefficients(g, 4)
        expansion = expand_generic(g, 4)
        for k in range(1, 5):
            self.assertTrue(linear.coefficient(k).equals(expansion.coefficient(k)), k)
