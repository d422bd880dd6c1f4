from django.core.management.base import BaseCommand, CommandError

from dprl.environments.envs import EnvKind
from dprl.experiments.config import load_config
from dprl.training.trainer import AgentKind
from dprl.utils.exceptions import ConfigError

# command-line option -> dotted config key
FLAG_KEYS = {
    "env": "experiment.envs",
    "agent": "experiment.agents",
    "seeds": "experiment.seeds",
    "rollouts": "experiment.n_rollouts",
    "threshold": "experiment.threshold",
    "out": "experiment.output_dir",
    "demo_episodes": "experiment.demo_episodes",
    "episodes": "train.episodes",
    "lam": "train.lambda",
    "gamma": "train.gamma",
    "learn_rate": "train.learn_rate",
    "alpha_up": "esd.alpha_up",
    "alpha_down": "esd.alpha_down",
    "beta": "esd.beta",
}


class ExperimentCommand(BaseCommand):
    """Shared flags and config resolution for the experiment subcommands."""

    def add_arguments(self, parser):
        parser.add_argument('--config', help='YAML file of dotted config keys')
        parser.add_argument(
            '--env',
            nargs='+',
            choices=[kind.value for kind in EnvKind] + ['all'],
            help='Environments to run (default: all)',
        )
        parser.add_argument(
            '--agent',
            nargs='+',
            choices=[kind.value for kind in AgentKind] + ['both'],
            help='Agents to run (default: both)',
        )
        parser.add_argument('--seed', '--seeds', dest='seeds', type=int, nargs='+', help='Seeds (default: 0 1 2 3 4)')
        parser.add_argument('--episodes', type=int, help='Training episodes per cell (default: 800)')
        parser.add_argument('--lambda', dest='lam', type=float, help='Auxiliary loss weight (default: 2.0)')
        parser.add_argument('--gamma', type=float, help='Discount factor (default: 0.99)')
        parser.add_argument('--learn-rate', dest='learn_rate', type=float, help='Adam learning rate (default: 0.01)')
        parser.add_argument('--rollouts', type=int, help='Evaluation rollouts per cell (default: 40)')
        parser.add_argument('--threshold', type=float, help='Decision-time threshold (default: 0.6)')
        parser.add_argument('--alpha-up', dest='alpha_up', type=float, help='ESD rising rate (default: 0.15)')
        parser.add_argument('--alpha-down', dest='alpha_down', type=float, help='ESD falling rate (default: 0.4)')
        parser.add_argument('--beta', type=float, help='ESD velocity mixing (default: 0.6)')
        parser.add_argument('--out', help='Output directory (default: DPRL_OUTPUT_DIR)')

    def load(self, options):
        overrides = {key: options.get(option) for option, key in FLAG_KEYS.items()}
        try:
            return load_config(options.get('config'), overrides)
        except ConfigError as exc:
            raise CommandError(str(exc))

    def report_cells(self, cells):
        for cell in cells:
            label = f"{cell['env']}/{cell['agent']}/seed {cell['seed']}"
            if cell['status'] == 'ok':
                metrics = cell.get('metrics')
                if metrics:
                    self.stdout.write(
                        f"  {label}: jerk={metrics['mean_jerk']:.4f} "
                        f"oscillations={metrics['mean_oscillations']:.2f} "
                        f"timing_variance={metrics['timing_variance']:.2f} "
                        f"committed={metrics['n_committed']}/{metrics['n_rollouts']}"
                    )
                else:
                    self.stdout.write(f"  {label}: trained")
            else:
                self.stdout.write(self.style.ERROR(f"  {label}: FAILED ({cell['error']})"))
