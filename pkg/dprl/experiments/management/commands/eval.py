from dprl.experiments.management.base import ExperimentCommand
from dprl.experiments.runner import evaluate_cells


class Command(ExperimentCommand):
    help = 'Evaluate saved checkpoints with frozen-policy rollouts and write metrics.csv and trace bundles'

    def handle(self, *args, **options):
        cfg = self.load(options)
        report = evaluate_cells(cfg)
        self.report_cells(report.cells)

        for path in report.files:
            self.stdout.write(f"  wrote {path}")
        if report.failures:
            self.stdout.write(self.style.ERROR(f"{len(report.failures)} cells could not be evaluated"))
        else:
            self.stdout.write(self.style.SUCCESS(f"Evaluated {len(report.cells)} cells"))
