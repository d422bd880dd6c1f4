from dprl.experiments.management.base import ExperimentCommand
from dprl.experiments.runner import train_cells


class Command(ExperimentCommand):
    help = 'Train REINFORCE / DP-RL policies and write checkpoints plus learning curves'

    def handle(self, *args, **options):
        cfg = self.load(options)
        cells = train_cells(cfg)
        self.report_cells(cells)

        failed = [cell for cell in cells if cell['status'] != 'ok']
        message = f"Trained {len(cells) - len(failed)} of {len(cells)} cells into {cfg.output_dir}"
        self.stdout.write(self.style.ERROR(message) if failed else self.style.SUCCESS(message))
