import numpy as np
import sympy
from django.test import SimpleTestCase, override_settings

from core.errors import OracleError
from expr.services import function_atom
from oracle.models import SamplePoint
from oracle.services import (
    compare,
    convergence_check,
    convergence_ratio,
    coordinate_metric,
    matrix_callable,
    metric_callable,
    numeric_ricci,
    sample_points,
    verify_ricci,
)
from tensor.models import Metric, TensorField
from tensor.services import ricci

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


def hyperbolic3():
    return Metric.from_matrix([x, y, z], sympy.eye(3) / z**2, name="H3")


def ppwave_metric():
    H = function_atom("H", ["y1", "y2"])
    return Metric.from_matrix(
        [v, y1, y2, u],
        [[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, H]],
        functions={"H": ("y1", "y2")},
        name="pp-wave",
    )


class NumericRicciTests(SimpleTestCase):
    def test_plana_se_anula(self):
        g = Metric.from_matrix([v, y1, y2, u], sympy.diag(-1, 1, 1, 1))
        value = numeric_ricci(metric_callable(g), SamplePoint((0.1, 0.2, -0.3, 0.4)))
        self.assertTrue(np.allclose(value, 0.0, atol=1e-9))

    def test_sig22_en_punto_fijo(self):
        g = sig22_metric()
        point = SamplePoint((0.3, -0.7, 0.1, 0.2))
        report = compare(
            ricci(g),
            lambda p: numeric_ricci(metric_callable(g), p),
            [point],
            coords=g.coords,
            tolerance=1e-6,
        )
        self.assertTrue(report.passed, str(report))

    def test_sig22_valores_de_ricci(self):
        g = sig22_metric()
        value = numeric_ricci(metric_callable(g), SamplePoint((0.3, -0.7, 0.1, 0.2)))
        self.assertAlmostEqual(value[2, 2], -12 * 0.3**2, places=6)
        self.assertAlmostEqual(value[2, 3], 24 * 0.3 * -0.7, places=6)
        self.assertAlmostEqual(value[3, 3], -12 * 0.7**2, places=6)

    def test_hiperbolico_es_menos_dos_g(self):
        g = hyperbolic3()
        point = SamplePoint((0.3, -0.2, 1.0))
        value = numeric_ricci(metric_callable(g), point)
        expected = -2 * metric_callable(g)(point.array)
        self.assertTrue(np.allclose(value, expected, rtol=1e-6, atol=1e-6))

    def test_metrica_degenerada(self):
        g = Metric.from_matrix([x, y], [[x, 0], [0, 1]])
        with self.assertRaises(OracleError):
            numeric_ricci(metric_callable(g), SamplePoint((0.0, 0.5)))

    def test_paso_invalido(self):
        with self.assertRaises(OracleError):
            SamplePoint((0.0, 0.0), step=0.0)


class SamplingTests(SimpleTestCase):
    def test_semilla_reproducible(self):
        g = sig22_metric()
        first = sample_points(g, count=5, seed=7)
        second = sample_points(g, count=5, seed=7)
        self.assertEqual([p.coords for p in first], [p.coords for p in second])
        self.assertTrue(all(-1.0 <= c <= 1.0 for p in first for c in p.coords))

    def test_limites_por_coordenada(self):
        points = sample_points(hyperbolic3(), count=4, seed=1, bounds={"z": (0.8, 1.2)})
        self.assertTrue(all(0.8 <= p.coords[2] <= 1.2 for p in points))

    def test_rechazo_agota_los_intentos(self):
        g = Metric.from_matrix([x, y], [[0, 0], [0, 1]])
        with self.assertRaises(OracleError):
            sample_points(g, count=2, seed=3)

    @override_settings(AMBIENTFORGE_SAMPLE_POINTS=3, AMBIENTFORGE_SEED=11)
    def test_configuracion_por_settings(self):
        self.assertEqual(len(sample_points(sig22_metric())), 3)


class CompareTests(SimpleTestCase):
    def test_entradas_identicas(self):
        g = sig22_metric()
        points = sample_points(g, count=3, seed=5)
        evaluate = matrix_callable(ricci(g).matrix(), g.coords)
        report = compare(ricci(g), lambda p: evaluate(p.array), points, coords=g.coords)
        self.assertEqual(report.discrepancy, 0.0)
        self.assertTrue(report.passed)

    def test_tensor_perturbado_falla(self):
        g = sig22_metric()
        R = ricci(g)
        perturbed = TensorField.from_function(
            ("d", "d"), 4, lambda i, j: R[i, j] + (1 if (i, j) == (0, 0) else 0)
        )
        points = sample_points(g, count=3, seed=5)
        report = compare(perturbed, lambda p: numeric_ricci(metric_callable(g), p), points, coords=g.coords)
        self.assertFalse(report.passed)
        self.assertIsNotNone(report.worst)

    def test_tensor_sin_coordenadas(self):
        g = sig22_metric()
        with self.assertRaises(OracleError):
            compare(ricci(g), lambda p: np.zeros((4, 4)), sample_points(g, count=1, seed=2))


class VerifyRicciTests(SimpleTestCase):
    def test_sig22_puntos_sembrados(self):
        report = verify_ricci(sig22_metric(), count=10, tolerance=1e-6)
        self.assertTrue(report.passed, str(report))
        self.assertEqual(report.points, 10)

    def test_hiperbolico_puntos_sembrados(self):
        report = verify_ricci(hyperbolic3(), count=10, bounds={"z": (0.8, 1.2)}, tolerance=1e-6)
        self.assertTrue(report.passed, str(report))

    def test_ppwave_con_funcion_realizada(self):
        report = verify_ricci(ppwave_metric(), count=5, bindings={"H": "y1^4 + y1*y2"}, tolerance=1e-6)
        self.assertTrue(report.passed, str(report))

    def test_funcion_sin_realizar(self):
        with self.assertRaises(OracleError):
            verify_ricci(ppwave_metric(), count=2)

    def test_marco_anholonomo(self):
        # Heisenberg riemanniano: e1 = dx, e2 = dy + x dz, e3 = dz
        g = Metric.in_frame([x, y, z], [[1, 0, 0], [0, 1, x], [0, 0, 1]], sympy.eye(3).tolist())
        coordinates = coordinate_metric(g)
        self.assertEqual(coordinates[1, 2], -x)
        report = verify_ricci(g, count=5, tolerance=1e-6)
        self.assertTrue(report.passed, str(report))


class ConvergenceTests(SimpleTestCase):
    def test_cociente_al_dividir_el_paso(self):
        point = SamplePoint((0.3, -0.2, 1.0), step=1e-2)
        ratio = convergence_ratio(hyperbolic3(), point)
        self.assertGreaterEqual(ratio, 3.0)
        self.assertLessEqual(ratio, 5.0)
        self.assertTrue(convergence_check(hyperbolic3(), point).passed)

    def test_richardson_reduce_el_error(self):
        g = hyperbolic3()
        metric_fn = metric_callable(g)
        point = SamplePoint((0.3, -0.2, 1.0), step=1e-2)
        expected = -2 * metric_fn(point.array)
        plain = np.max(np.abs(numeric_ricci(metric_fn, point) - expected))
        extrapolated = np.max(np.abs(numeric_ricci(metric_fn, point, richardson=True) - expected))
        self.assertLess(extrapolated, plain / 50)

    def test_cociente_con_richardson(self):
        point = SamplePoint((0.3, -0.2, 1.0), step=2e-2)
        ratio = convergence_ratio(hyperbolic3(), point, richardson=True)
        self.assertGreaterEqual(ratio, 10.0)
        self.assertLessEqual(ratio, 22.0)
        self.assertTrue(convergence_check(hyperbolic3(), point, richardson=True).passed)

    def test_verify_con_paso_grueso(self):
        bounds = {"z": (0.8, 1.2)}
        plain = verify_ricci(hyperbolic3(), count=3, bounds=bounds, step=5e-3, tolerance=1e-6)
        extrapolated = verify_ricci(
            hyperbolic3(), count=3, bounds=bounds, step=5e-3, tolerance=1e-6, richardson=True
        )
        self.assertFalse(plain.passed)
        self.assertTrue(extrapolated.passed, str(extrapolated))
