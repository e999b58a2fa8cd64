# cli/management/commands/curvature.py
from cli.commands import ReportCommand
from cli.services import run_curvature


class Command(ReportCommand):
    help = "Curvatura de un archivo .metric: Gamma, Riemann, Ricci, Scal y, si n >= 3, Schouten, Cotton, Weyl y Bach."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--oracle", action="store_true", help="Compara Ricci con diferencias finitas en puntos sembrados")
        parser.add_argument(
            "--richardson", action="store_true", help="Con --oracle, deriva con extrapolación de Richardson (error O(h^4))"
        )

    def build_report(self, document, options):
        return run_curvature(document, oracle=options["oracle"], richardson=options["richardson"])
