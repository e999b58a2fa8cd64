# cli/management/commands/example.py
from cli.commands import ReportCommand
from cli.examples import EXAMPLES, run_example


class Command(ReportCommand):
    help = f"Corre un ejemplo incorporado: {', '.join(EXAMPLES)}."
    takes_path = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("name", help="Nombre del ejemplo")

    def load_report(self, options):
        return run_example(options["name"])
