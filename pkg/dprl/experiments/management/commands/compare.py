from dprl.experiments.management.base import ExperimentCommand
from dprl.experiments.runner import run_experiment
from dprl.experiments.writers import TABLE_HEADERS
from dprl.utils.functions import format_float


class Command(ExperimentCommand):
    help = 'Train and evaluate both agents on every environment and write the comparison table'

    def handle(self, *args, **options):
        cfg = self.load(options)
        report = run_experiment(cfg)
        self.report_cells(report.cells)

        self.stdout.write(",".join(TABLE_HEADERS))
        for row in report.table:
            self.stdout.write(",".join([row['env']] + [format_float(row[h]) for h in TABLE_HEADERS[1:]]))

        for env, check in report.acceptance.items():
            verdict = self.style.SUCCESS('pass') if check['passed'] else self.style.WARNING('fail')
            self.stdout.write(f"  {env}: {verdict} ({check['votes']}/{len(check['per_seed'])} seeds, need {check['required']})")

        if report.failures:
            self.stdout.write(self.style.ERROR(f"{len(report.failures)} cells failed; see summary.json"))
        self.stdout.write(self.style.SUCCESS(f"Results written to {report.output_dir}"))
