import sympy
from django.test import SimpleTestCase, override_settings

from core import conf
from core.errors import (
    ExprSyntaxError,
    ForgeError,
    InputError,
    MetricFileError,
    ObstructedError,
    PreconditionError,
)
from core.models import Check, all_passed, failed


class CheckTests(SimpleTestCase):
    def test_estado_y_texto(self):
        ok = Check("tr O = 0", True)
        bad = Check("div O = 0", False, witness=(0, 1))
        self.assertEqual(ok.status, "pass")
        self.assertEqual(bad.status, "fail")
        self.assertEqual(str(ok), "Pasa · tr O = 0")
        self.assertEqual(str(bad), "Falla · div O = 0")

    def test_agregados(self):
        checks = [Check("a", True), Check("b", False), Check("c", True)]
        self.assertFalse(all_passed(checks))
        self.assertEqual([c.name for c in failed(checks)], ["b"])
        self.assertTrue(all_passed([]))


class ErrorTests(SimpleTestCase):
    def test_jerarquia(self):
        self.assertTrue(issubclass(MetricFileError, InputError))
        self.assertTrue(issubclass(ExprSyntaxError, InputError))
        self.assertTrue(issubclass(ObstructedError, ForgeError))
        self.assertFalse(issubclass(ObstructedError, InputError))

    def test_linea_en_el_mensaje(self):
        error = MetricFileError("Entrada mal formada", 7)
        self.assertEqual(error.line, 7)
        self.assertEqual(str(error), "línea 7: Entrada mal formada")
        self.assertEqual(str(MetricFileError("Sin línea")), "Sin línea")

    def test_testigos(self):
        self.assertEqual(ExprSyntaxError("Símbolo inesperado", "x +", 3).position, 3)
        error = PreconditionError("No es Walker", relation="g_ab = 0", witness=(0, 1))
        self.assertEqual((error.relation, error.witness), ("g_ab = 0", (0, 1)))
        self.assertEqual(ObstructedError("obstruida", obstruction="O").witness, "O")


class ConfTests(SimpleTestCase):
    @override_settings(
        AMBIENTFORGE_SEED=20240601,
        AMBIENTFORGE_TOLERANCE=1e-6,
        AMBIENTFORGE_FD_STEP=1e-4,
        AMBIENTFORGE_SAMPLE_POINTS=10,
        AMBIENTFORGE_OBSTRUCTION_NORM="1",
        AMBIENTFORGE_REPORT_SCHEMA="1",
    )
    def test_valores_por_defecto(self):
        self.assertEqual(conf.get_seed(), 20240601)
        self.assertEqual(conf.get_tolerance(), 1e-6)
        self.assertEqual(conf.get_fd_step(), 1e-4)
        self.assertEqual(conf.get_sample_points(), 10)
        self.assertEqual(conf.get_obstruction_norm(), 1)
        self.assertEqual(conf.get_report_schema(), "1")

    @override_settings(AMBIENTFORGE_OBSTRUCTION_NORM="-1/2", AMBIENTFORGE_TOLERANCE="1e-8")
    def test_sobrescritura(self):
        self.assertEqual(conf.get_obstruction_norm(), sympy.Rational(-1, 2))
        self.assertEqual(conf.get_tolerance(), 1e-8)
