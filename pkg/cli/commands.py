# cli/commands.py
import logging

from django.core.management.base import BaseCommand, CommandError

from core.errors import ForgeError, InputError
from cli.metricfile import load_metric_file
from cli.reports import render_lines, write_json

logger = logging.getLogger(__name__)

EXIT_FAILED = 1
EXIT_INPUT = 2


class ReportCommand(BaseCommand):
    """
    Base de los comandos que producen un Report.
    Códigos: 0 todo pasa, 1 alguna verificación falla, 2 entrada inválida.
    """

    takes_path = True

    def add_arguments(self, parser):
        if self.takes_path:
            parser.add_argument("path", help="Archivo .metric")
        parser.add_argument("--json", dest="json_path", default=None, help="Escribe el informe JSON en esta ruta")

    def build_report(self, document, options):
        raise NotImplementedError

    def load_report(self, options):
        document = load_metric_file(options["path"])
        return self.build_report(document, options)

    def handle(self, *args, **options):
        try:
            report = self.load_report(options)
            if options.get("json_path"):
                write_json(report, options["json_path"])
        except InputError as exc:
            logger.warning("Entrada inválida: %s", exc)
            raise CommandError(str(exc), returncode=EXIT_INPUT) from exc
        except ForgeError as exc:
            logger.warning("Falla matemática: %s (testigo: %s)", exc, exc.witness)
            raise CommandError(f"{exc} (testigo: {exc.witness})", returncode=EXIT_FAILED) from exc
        except Exception:
            logger.exception("Error inesperado en %s", self.__class__.__module__)
            raise

        styles = {"success": self.style.SUCCESS, "warning": self.style.WARNING, "error": self.style.ERROR}
        for level, text in render_lines(report):
            style = styles.get(level)
            self.stdout.write(style(text) if style else text)

        if not report.passed:
            names = ", ".join(check.name for check in report.failures)
            raise CommandError(f"Verificaciones fallidas: {names}", returncode=EXIT_FAILED)
        self.stdout.write(self.style.SUCCESS(f"{report.command}: {len(report.checks)} verificaciones, todas pasan."))
