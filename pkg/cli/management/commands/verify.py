# cli/management/commands/verify.py
from cli.commands import ReportCommand
from cli.services import run_verify


class Command(ReportCommand):
    help = "Verifica las ecuaciones de Einstein ambiente para la h declarada en [ambient]."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--order", type=int, default=None, help="Orden m de la verificación")
        parser.add_argument("--no-direct", dest="direct", action="store_false", help="Omite el Ricci ambiente directo")

    def build_report(self, document, options):
        return run_verify(document, order=options["order"], direct=options["direct"])
