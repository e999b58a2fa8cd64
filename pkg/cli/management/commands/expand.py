# cli/management/commands/expand.py
from cli.commands import ReportCommand
from cli.services import run_expand


class Command(ReportCommand):
    help = "Expansión de la métrica ambiente hasta el orden pedido (obstrucción incluida en dimensión par)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--order", type=int, default=None, help="Orden m de la expansión")
        parser.add_argument("--rank", type=int, default=None, help="Rango de N para la auditoría nulo-Ricci")
        parser.add_argument("--normalization", default=None, help="obstruction=<racional>")
        parser.add_argument("--even-choice", dest="even_choice", default=None, help="Archivo [ambient] con g^(n/2)")

    def build_report(self, document, options):
        return run_expand(
            document,
            order=options["order"],
            even_choice=options["even_choice"],
            normalization=options["normalization"],
            rank=options["rank"],
        )
