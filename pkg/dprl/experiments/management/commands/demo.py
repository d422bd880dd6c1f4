from dprl.experiments.management.base import ExperimentCommand
from dprl.experiments.runner import run_demo


class Command(ExperimentCommand):
    help = 'Export one representative episode per environment: signal, ESD trajectory and both agents\' p_t'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--demo-episodes',
            dest='demo_episodes',
            type=int,
            help='Training episodes for the demo agents (default: --episodes)',
        )

    def handle(self, *args, **options):
        cfg = self.load(options)
        for path in run_demo(cfg):
            self.stdout.write(self.style.SUCCESS(f"wrote {path}"))
