import itertools
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import sympy
from django.test import SimpleTestCase

from core.errors import DegenerateMetricError, DimensionError, RankMismatchError
from core.models import all_passed
from expr.services import function_atom, normal
from tensor.models import Metric, TensorField
from tensor.relative import connection_difference, nilpotency_report, relative_ricci
from tensor.services import (
    bach,
    box,
    christoffel,
    cotton,
    covariant_derivative,
    divergence,
    inverse_metric,
    lie_derivative,
    metric_tensor,
    ricci,
    riemann,
    scalar,
    schouten,
    trace,
    weyl,
)

x1, x2, y1, y2 = sympy.symbols("x1 x2 y1 y2")
x, y, z = sympy.symbols("x y z")
v, u = sympy.symbols("v u")


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


def sig22_frame_metric():
    frame = [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [-x1**2, 2 * x1 * x2, 1, 0],
        [2 * x1 * x2, -x2**2, 0, 1],
    ]
    gframe = [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]
    return Metric.in_frame([x1, x2, y1, y2], frame, gframe, name="sig22-marco")


def hyperbolic3():
    factor = 1 / z**2
    return Metric.from_matrix([x, y, z], sympy.diag(factor, factor, factor).tolist(), name="H3")


def flat(n, signs=None):
    signs = signs or [1] * n
    coords = sympy.symbols(f"x0:{n}")
    return Metric.from_matrix(coords, sympy.diag(*signs).tolist(), name="plana")


def ppwave4():
    H = function_atom("H", ["y1", "y2", "u"])
    return Metric.from_matrix(
        [v, y1, y2, u],
        [[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, H]],
        functions={"H": ("y1", "y2", "u")},
        name="pp-onda",
    ), H


def sig22_ricci_expected():
    values = {(2, 2): -12 * x1**2, (2, 3): 24 * x1 * x2, (3, 3): -12 * x2**2}
    return TensorField.from_function(
        ("d", "d"), 4, lambda i, j: values.get((min(i, j), max(i, j)), 0)
    )


class InverseTests(SimpleTestCase):
    def test_identidad(self):
        g = Metric.from_matrix([x, y], [[1, 0], [0, 1]])
        self.assertEqual(inverse_metric(g).matrix(), sympy.eye(2))

    def test_sig22_producto_identidad(self):
        g = sig22_metric()
        inverse = inverse_metric(g).matrix()
        self.assertEqual((g.matrix() * inverse).applyfunc(normal), sympy.eye(4))
        self.assertEqual(inverse[0, 2], 1)
        self.assertEqual(inverse[2, 2], 0)

    def test_perturbacion_nilpotente_lineal(self):
        # g0 plana (2,2) y h con imagen en span(d_x1, d_x2)
        g0 = Metric.from_matrix([x1, x2, y1, y2], [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])
        h = [[0] * 4 for _ in range(4)]
        h[2][2], h[2][3], h[3][2], h[3][3] = x1, y2, y2, x2**2
        g = Metric.from_matrix(g0.coords, (sympy.Matrix(g0.components) + sympy.Matrix(h)).tolist())
        g0_inv = inverse_metric(g0).matrix()
        h_up = g0_inv * sympy.Matrix(h) * g0_inv
        self.assertEqual(inverse_metric(g).matrix(), (g0_inv - h_up).applyfunc(normal))

    def test_singular(self):
        g = Metric.from_matrix([x, y], [[x, x], [x, x]])
        with self.assertRaises(DegenerateMetricError):
            inverse_metric(g)


class ConnectionTests(SimpleTestCase):
    def test_plana(self):
        self.assertTrue(christoffel(flat(3, [1, -1, 1])).is_zero())

    def test_hiperbolico(self):
        gamma = christoffel(hyperbolic3())
        self.assertEqual(gamma[0, 0, 2], -1 / z)
        self.assertEqual(gamma[2, 0, 0], 1 / z)
        self.assertFalse(gamma.check_symmetries())

    def test_sig22_coordenadas(self):
        gamma = christoffel(sig22_metric())
        self.assertEqual(gamma[0, 2, 0], 2 * x1)
        self.assertEqual(gamma[1, 2, 0], -2 * x2)
        self.assertEqual(gamma[0, 3, 0], -2 * x2)

    def test_sig22_marco(self):
        gamma = christoffel(sig22_frame_metric())
        # nabla e1 = 2 (x1 dy1 - x2 dy2) e1 - 2 x2 dy1 e2
        self.assertEqual(gamma[0, 2, 0], 2 * x1)
        self.assertEqual(gamma[1, 2, 0], -2 * x2)
        self.assertEqual(gamma[0, 3, 0], -2 * x2)
        # nabla e2 = -2 x1 dy1 e2 - 2 x1 dy2 e1 + 2 x2 dy2 e2
        self.assertEqual(gamma[1, 2, 1], -2 * x1)
        self.assertEqual(gamma[0, 3, 1], -2 * x1)
        self.assertEqual(gamma[1, 3, 1], 2 * x2)
        for k, j in itertools.product(range(4), range(2)):
            self.assertEqual(gamma[k, 0, j], 0)

    def test_metricidad(self):
        for g in (sig22_metric(), sig22_frame_metric(), hyperbolic3()):
            self.assertTrue(covariant_derivative(g, metric_tensor(g)).is_zero(), g.name)


class CurvatureTests(SimpleTestCase):
    def test_plana(self):
        g = flat(4, [1, 1, -1, -1])
        self.assertTrue(riemann(g).is_zero())
        self.assertTrue(ricci(g).is_zero())

    def test_hiperbolico_curvatura_constante(self):
        g = hyperbolic3()
        R = riemann(g, lowered=True)
        expected = TensorField.from_function(
            ("d", "d", "d", "d"),
            3,
            lambda i, j, k, l: -(g.g(i, k) * g.g(j, l) - g.g(i, l) * g.g(j, k)),
        )
        self.assertTrue(R.equals(expected))
        self.assertTrue(ricci(g).equals(metric_tensor(g).scale(-2)))
        self.assertEqual(scalar(g), -6)

    def test_sig22_componentes_en_el_marco(self):
        R = riemann(sig22_frame_metric(), lowered=True)
        self.assertEqual(R[0, 2, 2, 0], 2)
        self.assertEqual(R[0, 2, 3, 1], -2)
        self.assertEqual(R[1, 3, 3, 1], 2)

    def test_sig22_ricci(self):
        self.assertTrue(ricci(sig22_metric()).equals(sig22_ricci_expected()))
        frame_ricci = ricci(sig22_frame_metric())
        self.assertEqual(frame_ricci[2, 2], -12 * x1**2)
        self.assertEqual(frame_ricci[2, 3], 24 * x1 * x2)
        self.assertEqual(frame_ricci[3, 3], -12 * x2**2)

    def test_ppwave_ricci(self):
        g, H = ppwave4()
        Ric = ricci(g)
        laplacian = sympy.diff(H, y1, 2) + sympy.diff(H, y2, 2)
        self.assertEqual(Ric[3, 3], normal(-laplacian / 2))
        for index, value in Ric.nonzero_items():
            self.assertEqual(index, (3, 3))

    def test_simetrias_y_bianchi(self):
        for g in (sig22_metric(), sig22_frame_metric(), hyperbolic3()):
            R = riemann(g, lowered=True)
            n = g.n
            for i, j, k, l in itertools.product(range(n), repeat=4):
                self.assertEqual(R[i, j, k, l], normal(-R[j, i, k, l]))
                self.assertEqual(R[i, j, k, l], normal(-R[i, j, l, k]))
                self.assertEqual(R[i, j, k, l], R[k, l, i, j])
                self.assertEqual(normal(R[i, j, k, l] + R[j, k, i, l] + R[k, i, j, l]), 0)

    def test_bianchi_contraida(self):
        for g in (sig22_metric(), hyperbolic3()):
            div = divergence(g, ricci(g))
            s = scalar(g)
            for i in range(g.n):
                self.assertEqual(normal(div[i] - g.apply(i, s) / 2), 0)


class ConformalTests(SimpleTestCase):
    def test_schouten_einstein(self):
        g = hyperbolic3()
        self.assertTrue(schouten(g).equals(metric_tensor(g).scale(sympy.Rational(-1, 2))))

    def test_schouten_traza(self):
        for g in (sig22_metric(), hyperbolic3()):
            self.assertEqual(normal(trace(g, schouten(g)) - scalar(g) / (2 * (g.n - 1))), 0)

    def test_schouten_dimension(self):
        with self.assertRaises(DimensionError):
            schouten(flat(2))

    def test_schouten_escalar_nula(self):
        g = sig22_metric()
        self.assertTrue(schouten(g).equals(ricci(g).scale(sympy.Rational(1, 2))))

    def test_plana(self):
        g = flat(4)
        self.assertTrue(cotton(g).is_zero())
        self.assertTrue(bach(g).is_zero())

    def test_weyl_conformemente_plana(self):
        factor = 1 + x1**2
        g = Metric.from_matrix([x1, x2, y1, y2], sympy.diag(factor, factor, -factor, -factor).tolist())
        self.assertTrue(weyl(g).is_zero())

    def test_weyl_sin_traza(self):
        g = sig22_metric()
        W = weyl(g)
        ginv = inverse_metric(g)
        for j, l in itertools.product(range(4), repeat=2):
            value = sum(ginv[i, k] * W[i, j, k, l] for i in range(4) for k in range(4))
            self.assertEqual(normal(value), 0)

    def test_cotton_antisimetrico(self):
        self.assertFalse(cotton(sig22_metric()).check_symmetries())

    def test_bach_sig22(self):
        B = bach(sig22_metric())
        self.assertEqual(B[2, 2], -144 * x1**2)
        self.assertEqual(B[2, 3], 288 * x1 * x2)
        self.assertEqual(B[3, 3], -144 * x2**2)


class DerivativeTests(SimpleTestCase):
    def test_box_constante(self):
        self.assertTrue(box(sig22_metric(), sympy.Integer(7)).is_zero())

    def test_box_plano(self):
        g = flat(3, [1, -1, 1])
        x0, x1_, x2_ = g.coords
        f = x0**3 * x1_ + x2_**2 * x1_**2
        expected = sympy.diff(f, x0, 2) - sympy.diff(f, x1_, 2) + sympy.diff(f, x2_, 2)
        self.assertEqual(box(g, f)[()], normal(expected))

    def test_box_ppwave_es_laplaciano_transversal(self):
        g, H = ppwave4()
        h_scalar = function_atom("h", ["y1", "y2", "u"])
        h = TensorField.from_function(("d", "d"), 4, lambda i, j: h_scalar if (i, j) == (3, 3) else 0)
        result = box(g, h)
        self.assertEqual(result[3, 3], normal(sympy.diff(h_scalar, y1, 2) + sympy.diff(h_scalar, y2, 2)))

    def test_divergencia_rango(self):
        with self.assertRaises(RankMismatchError):
            divergence(flat(3), box(flat(3), sympy.Integer(1)))

    def test_lie_killing(self):
        g, _ = ppwave4()
        X = TensorField.from_function(("u",), 4, lambda i: 1 if i == 0 else 0)
        self.assertTrue(lie_derivative(g, X, metric_tensor(g)).is_zero())


class RelativeTests(SimpleTestCase):
    def test_misma_metrica(self):
        g = sig22_metric()
        self.assertTrue(connection_difference(g, g).is_zero())
        self.assertTrue(relative_ricci(g, connection_difference(g, g)).equals(ricci(g)))

    def test_diferencia_de_christoffel(self):
        g0 = Metric.from_matrix([x, y], [[1, 0], [0, 1]])
        g = Metric.from_matrix([x, y], [[1 + x * y, y], [y, 1 + x**2]])
        C = connection_difference(g, g0)
        self.assertTrue(C.equals(christoffel(g0) - christoffel(g)))

    def test_equivalencia_ricci_aleatoria(self):
        rng = np.random.default_rng(20240601)
        for n in (2, 3):
            coords = sympy.symbols(f"x0:{n}")
            for _ in range(2):
                delta = sympy.zeros(n, n)
                for i, j in itertools.combinations_with_replacement(range(n), 2):
                    value = sympy.Rational(int(rng.integers(-3, 4)), 5) * coords[int(rng.integers(0, n))]
                    delta[i, j] = delta[j, i] = value
                g0 = Metric.from_matrix(coords, sympy.eye(n).tolist())
                g = Metric.from_matrix(coords, (sympy.eye(n) + delta).tolist())
                rel = relative_ricci(g0, connection_difference(g, g0))
                self.assertTrue(rel.equals(ricci(g)))

    def test_equivalencia_sig22_base_plana(self):
        g = sig22_metric()
        g0 = Metric.from_matrix(g.coords, [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])
        rel = relative_ricci(g0, connection_difference(g, g0))
        self.assertTrue(rel.equals(sig22_ricci_expected()))

    def test_nilpotencia_cero(self):
        g = sig22_metric()
        h = TensorField.zeros(("d", "d"), 4)
        self.assertTrue(all_passed(nilpotency_report(g, h)))

    def test_nilpotencia_ricci_sig22(self):
        g = sig22_metric()
        checks = nilpotency_report(g, ricci(g), ricci_input=True)
        self.assertTrue(all_passed(checks), [str(c) for c in checks])

    def test_nilpotencia_falla_con_g0(self):
        g = sig22_metric()
        checks = {check.name: check for check in nilpotency_report(g, metric_tensor(g))}
        self.assertFalse(checks["g: (h#)^2 = 0"].passed)


class MemoTests(SimpleTestCase):
    def test_una_sola_evaluacion_con_varios_hilos(self):
        g = hyperbolic3()
        calls = []
        barrier = threading.Barrier(8)

        def compute():
            calls.append(1)
            time.sleep(0.01)
            return object()

        def worker(_):
            barrier.wait()
            return g.memoized("prueba", compute)

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(worker, range(8)))
        self.assertEqual(len(calls), 1)
        self.assertTrue(all(result is results[0] for result in results))

    def test_ricci_compartido_entre_hilos(self):
        g = sig22_metric()
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(lambda _: ricci(g), range(4)))
        self.assertTrue(all(result is results[0] for result in results))
        self.assertTrue(results[0].equals(sig22_ricci_expected()))
