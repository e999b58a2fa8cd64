import json
import tempfile
from io import StringIO
from pathlib import Path

import sympy
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.errors import InputError, MetricFileError
from cli.examples import EXAMPLES, fixture_path, run_example
from cli.metricfile import load_metric_file, parse_metric_file
from cli.reports import input_digest, report_dict
from cli.services import parse_normalization, run_curvature, run_verify, run_walker_check

x, y, z = sympy.symbols("x y z")


def metric_text(*entries, extra=""):
    lines = ["[coordinates]", "x, y, z", "[metric]", *entries]
    return "\n".join(lines) + "\n" + extra


class MetricFileTests(SimpleTestCase):
    def test_error_con_numero_de_linea(self):
        text = metric_text("g[x,x] = 1", "g[y,y] = 1 +", "g[z,z] = 1")
        with self.assertRaises(MetricFileError) as ctx:
            parse_metric_file(text)
        self.assertEqual(ctx.exception.line, 5)
        self.assertIn("línea 5", str(ctx.exception))

    def test_relleno_simetrico(self):
        document = parse_metric_file(metric_text("g[x,x] = 1", "g[x,y] = z", "g[z,z] = 1"))
        self.assertEqual(document.metric.g(1, 0), z)
        self.assertEqual(document.metric.g(0, 1), z)
        self.assertEqual(document.metric.g(1, 1), 0)

    def test_indices_numericos(self):
        document = parse_metric_file(metric_text("g[1,1] = 1", "g[2,3] = 1"))
        self.assertEqual(document.metric.g(2, 1), 1)

    def test_entrada_no_simetrica(self):
        with self.assertRaises(MetricFileError) as ctx:
            parse_metric_file(metric_text("g[x,x] = 1", "g[y,z] = 1", "g[z,y] = 2"))
        self.assertEqual(ctx.exception.line, 6)

    def test_entrada_repetida(self):
        with self.assertRaises(MetricFileError):
            parse_metric_file(metric_text("g[x,x] = 1", "g[x,x] = 1", "g[y,z] = 1"))

    def test_variable_no_declarada(self):
        with self.assertRaises(MetricFileError) as ctx:
            parse_metric_file(metric_text("g[x,x] = w", "g[y,y] = 1", "g[z,z] = 1"))
        self.assertEqual(ctx.exception.line, 4)

    def test_indice_desconocido(self):
        with self.assertRaises(MetricFileError):
            parse_metric_file(metric_text("g[x,w] = 1"))

    def test_metrica_degenerada(self):
        with self.assertRaises(MetricFileError):
            parse_metric_file(metric_text("g[x,x] = 1", "g[y,y] = 1"))

    def test_exactamente_un_bloque(self):
        with self.assertRaises(MetricFileError):
            parse_metric_file("[coordinates]\nx, y\n")
        text = metric_text("g[x,x] = 1", "g[y,y] = 1", "g[z,z] = 1", extra="[frame]\np = 1\n")
        with self.assertRaises(MetricFileError):
            parse_metric_file(text)

    def test_seccion_desconocida(self):
        with self.assertRaises(MetricFileError) as ctx:
            parse_metric_file("[coordinates]\nx\n[tensores]\n")
        self.assertEqual(ctx.exception.line, 3)

    def test_funcion_con_realizacion(self):
        text = "[coordinates]\nv, y1, u\n[functions]\nH(y1) = y1^2\n[metric]\ng[v,u] = 1\ng[y1,y1] = 1\ng[u,u] = H(y1)\n"
        document = parse_metric_file(text)
        self.assertEqual(document.functions, {"H": ("y1",)})
        self.assertEqual(document.bindings, {"H": "y1^2"})

    def test_ambiente_con_logaritmo(self):
        text = metric_text(
            "g[x,z] = 1", "g[y,y] = 1", extra="[ambient]\ntruncation = 4\nh[z,z;1] = y\nh[z,z;2;log] = -3\n"
        )
        document = parse_metric_file(text)
        self.assertEqual(document.h_terms[(2, 2)], {(1, 0): y, (2, 1): -3})
        self.assertEqual(document.truncation, 4)
        self.assertTrue(document.has_ambient)

    def test_h_sin_anularse(self):
        with self.assertRaises(MetricFileError):
            parse_metric_file(metric_text("g[x,x] = 1", "g[y,y] = 1", "g[z,z] = 1", extra="[ambient]\nh[x,x;0] = 1\n"))

    def test_fixture_sig22(self):
        document = load_metric_file(fixture_path("sig22"))
        self.assertEqual(document.n, 4)
        self.assertEqual(document.rank(), 2)
        self.assertTrue(document.has_ambient)
        self.assertEqual(document.name, "sig22")

    def test_fixture_algebra(self):
        document = load_metric_file(fixture_path("heisenberg-semidirect"))
        self.assertIsNotNone(document.algebra)
        self.assertEqual((document.frame.n, document.frame.p), (4, 1))

    def test_archivo_inexistente(self):
        with self.assertRaises(MetricFileError):
            load_metric_file("/no/existe.metric")


class ServiceTests(SimpleTestCase):
    def test_normalizacion(self):
        self.assertEqual(parse_normalization("obstruction=-1/2"), sympy.Rational(-1, 2))
        self.assertIsNone(parse_normalization(None))
        with self.assertRaises(InputError):
            parse_normalization("bach=1")

    def test_curvatura_einstein(self):
        report = run_curvature(load_metric_file(fixture_path("einstein-h3")))
        self.assertTrue(report.passed, [str(c) for c in report.failures])
        self.assertIn("Weyl", report.values)
        self.assertEqual(report.values["Scal"], "-6")

    def test_curvatura_con_richardson(self):
        report = run_curvature(load_metric_file(fixture_path("einstein-h3")), oracle=True, richardson=True)
        self.assertEqual(report.flags, {"oracle": True, "richardson": True})
        self.assertIn("oráculo numérico de Ricci", {check.name for check in report.checks})

    def test_walker_sig22_sin_contraccion_nula(self):
        report = run_walker_check(load_metric_file(fixture_path("sig22")))
        checks = {check.name: check for check in report.checks}
        self.assertTrue(checks["g_ab = g_aB = 0"].passed)
        self.assertTrue(checks["span(d_a) paralelo"].passed)
        self.assertFalse(checks["N ⌟ R = 0"].passed)
        self.assertEqual(report.exit_code, 1)

    def test_verify_sig22_por_orden(self):
        document = load_metric_file(fixture_path("sig22"))
        self.assertTrue(run_verify(document, order=1).passed)
        failing = run_verify(document, order=2, direct=False)
        self.assertFalse(failing.passed)
        self.assertEqual(failing.failures[0].name, "E1 = O(rho^2)")

    def test_verify_exacta_sin_orden(self):
        with self.assertRaises(InputError):
            run_verify(load_metric_file(fixture_path("sig22")))

    def test_digest_determinista(self):
        text = fixture_path("flat").read_text(encoding="utf-8")
        self.assertEqual(input_digest(text, {"order": 2}), input_digest(text, {"order": 2}))
        self.assertNotEqual(input_digest(text, {"order": 2}), input_digest(text, {"order": 3}))


class CommandTests(SimpleTestCase):
    def run_command(self, *args):
        out = StringIO()
        call_command(*args, stdout=out)
        return out.getvalue()

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as ctx:
            self.run_command(*args)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception

    def test_curvature_pasa(self):
        output = self.run_command("curvature", str(fixture_path("einstein-h3")))
        self.assertIn("todas pasan", output)
        self.assertIn("Ric[x,x]", output)

    def test_curvature_con_oraculo(self):
        output = self.run_command("curvature", str(fixture_path("einstein-h3")), "--oracle")
        self.assertIn("oráculo numérico de Ricci", output)

    def test_walker_check_falla(self):
        self.assertExitCode(1, "walker_check", str(fixture_path("non-walker")))

    def test_walker_check_sin_rango(self):
        self.assertExitCode(2, "walker_check", str(fixture_path("einstein-h3")))

    def test_expand_einstein(self):
        output = self.run_command("expand", str(fixture_path("einstein-h3")), "--order", "2")
        self.assertIn("coincide con la forma cerrada de Einstein", output)

    def test_expand_obstruida(self):
        error = self.assertExitCode(1, "expand", str(fixture_path("sig22")), "--order", "2")
        self.assertIn("obstrucción nula", str(error))

    def test_expand_con_eleccion_par(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / "flat.json"
            self.run_command(
                "expand",
                str(fixture_path("flat")),
                "--order",
                "2",
                "--even-choice",
                str(fixture_path("flat-choice")),
                "--json",
                str(target),
            )
            data = json.loads(target.read_text(encoding="utf-8"))
        self.assertIn("g(2)[x,y]", data["series"]["g(2)"])
        self.assertEqual(data["flags"]["order"], 2)

    def test_normalizacion_invalida(self):
        self.assertExitCode(2, "expand", str(fixture_path("sig22")), "--normalization", "obstruction=")

    def test_verify_codigos(self):
        self.run_command("verify", str(fixture_path("sig22")), "--order", "1")
        self.assertExitCode(1, "verify", str(fixture_path("sig22")), "--order", "2", "--no-direct")
        self.assertExitCode(2, "verify", str(fixture_path("sig22")))
        self.assertExitCode(2, "verify", str(fixture_path("einstein-h3")), "--order", "2")

    def test_verify_plana(self):
        output = self.run_command("verify", str(fixture_path("flat")))
        self.assertIn("residuos = Ricci ambiente directo", output)

    def test_archivo_inexistente(self):
        self.assertExitCode(2, "curvature", "/no/existe.metric")

    def test_json_esquema_y_digest(self):
        with tempfile.TemporaryDirectory() as tmp:
            first, second = Path(tmp) / "a.json", Path(tmp) / "b.json"
            for target in (first, second):
                self.run_command("verify", str(fixture_path("sig22")), "--order", "1", "--json", str(target))
            a = json.loads(first.read_text(encoding="utf-8"))
            b = json.loads(second.read_text(encoding="utf-8"))
        self.assertEqual(
            set(a), {"schema", "command", "input_digest", "flags", "checks", "series", "values"}
        )
        self.assertEqual(a["schema"], "1")
        self.assertEqual(a["command"], "verify")
        self.assertEqual(a["input_digest"], b["input_digest"])
        self.assertTrue(all(check["status"] == "pass" for check in a["checks"]))
        self.assertIn("h[y1,y1]", a["series"])


class ExampleTests(SimpleTestCase):
    def test_ejemplos_pasan(self):
        for name in EXAMPLES:
            with self.subTest(name=name):
                report = run_example(name)
                self.assertTrue(report.passed, [f"{c} {c.witness}" for c in report.failures])
                self.assertGreater(len(report.checks), 0)

    def test_sig22_incluye_valores_esperados(self):
        names = {check.name for check in run_example("sig22").checks}
        self.assertTrue({"ricci esperado", "obstruction esperado", "published esperado"} <= names)

    def test_ppwave_par_rama_logaritmica(self):
        checks = {check.name: check for check in run_example("ppwave-even").checks}
        self.assertTrue(checks["sin rama logarítmica: obstruida"].passed)
        self.assertTrue(checks["h2log esperado"].passed)

    def test_ejemplo_desconocido(self):
        with self.assertRaises(InputError):
            run_example("esfera")

    def test_comando_example(self):
        output = StringIO()
        call_command("example", "einstein-h3", stdout=output)
        self.assertIn("Ric(g~) = 0", output.getvalue())

    def test_reporte_serializable(self):
        data = report_dict(run_example("einstein-h3"))
        json.dumps(data)
        self.assertEqual(data["flags"], {"name": "einstein-h3"})
