# cli/management/commands/walker_check.py
from cli.commands import ReportCommand
from cli.services import run_walker_check


class Command(ReportCommand):
    help = "Verifica la forma de Walker, la distribución nula paralela y las condiciones nulo-Ricci."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--rank", type=int, default=None, help="Rango p de la distribución nula")

    def build_report(self, document, options):
        return run_walker_check(document, rank=options["rank"])
