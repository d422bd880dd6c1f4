"""
Experiment configuration: YAML file with flat dotted keys, plus flag overrides.

    train.lambda: 0.5
    env.horizon: 100
    experiment.envs: [drift, window]

Nested mappings (`train: {lambda: 0.5}`) are flattened to the same keys.
Precedence is defaults < file < overrides.
"""
import logging
from dataclasses import dataclass, field

import yaml
from django.conf import settings

from dprl.environments.envs import EnvConfig, EnvKind
from dprl.esd.dynamics import EsdParams
from dprl.evaluation.metrics import DEFAULT_THRESHOLD
from dprl.experiments.serializers import SECTION_SERIALIZERS
from dprl.training.trainer import AgentKind, TrainConfig
from dprl.utils.exceptions import ConfigError
from dprl.utils.validation import first_error

logger = logging.getLogger(__name__)

__all__ = ["ExperimentConfig", "load_config", "flatten"]

DEFAULT_SEEDS = (0, 1, 2, 3, 4)


@dataclass(frozen=True)
class ExperimentConfig:
    envs: tuple = tuple(EnvKind)
    agents: tuple = tuple(AgentKind)
    seeds: tuple = DEFAULT_SEEDS
    n_rollouts: int = 40
    threshold: float = DEFAULT_THRESHOLD
    output_dir: str = None
    demo_episodes: int = None
    train: TrainConfig = field(default_factory=TrainConfig)
    env: EnvConfig = field(default_factory=EnvConfig)
    esd: EsdParams = field(default_factory=EsdParams)

    @property
    def cells(self):
        """Every (env, agent, seed) triple, in table order."""
        return [(env, agent, seed) for env in self.envs for agent in self.agents for seed in self.seeds]

    def to_flat(self):
        """Flat dotted-key dict; `load_config(overrides=cfg.to_flat())` rebuilds the same config."""
        flat = {
            "experiment.envs": [kind.value for kind in self.envs],
            "experiment.agents": [kind.value for kind in self.agents],
            "experiment.seeds": list(self.seeds),
            "experiment.n_rollouts": self.n_rollouts,
            "experiment.threshold": self.threshold,
            "experiment.output_dir": self.output_dir,
            "experiment.demo_episodes": self.demo_episodes,
        }
        train = self.train.to_dict()
        train.pop("seed")
        flat.update({f"train.{key}": value for key, value in train.items()})
        flat.update({f"env.{key}": value for key, value in self.env.to_dict().items()})
        flat.update({f"esd.{key}": value for key, value in self.esd.to_dict().items()})
        return flat


def flatten(data, prefix=""):
    flat = {}
    for key, value in data.items():
        dotted = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, dict):
            flat.update(flatten(value, dotted))
        else:
            flat[dotted] = value
    return flat


def _read_file(path):
    try:
        with open(path, encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file ({exc.strerror})") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed config file: {exc}") from exc

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config file must hold a mapping of dotted keys")
    return flatten(data)


def _split_sections(flat):
    sections = {name: {} for name in SECTION_SERIALIZERS}
    for dotted, value in flat.items():
        section, _, key = dotted.partition(".")
        if section not in sections or not key:
            raise ConfigError(f"{dotted}: unknown config key", key=dotted)
        sections[section][key] = value
    return sections


def _validate_section(name, values):
    serializer = SECTION_SERIALIZERS[name](data=values)
    unknown = sorted(set(values) - set(serializer.fields))
    if unknown:
        key = f"{name}.{unknown[0]}"
        raise ConfigError(f"{key}: unknown config key", key=key)
    if not serializer.is_valid():
        key, message = first_error(serializer.errors, parent_key=name)
        raise ConfigError(f"{key}: {message}", key=key)
    return serializer.validated_data


def load_config(path=None, overrides=None):
    """
    Resolve an ExperimentConfig from an optional YAML file and flag overrides.

    `overrides` maps dotted keys to values; `None` values are ignored so unset
    command-line flags never clobber the file.
    """
    flat = _read_file(path) if path else {}
    flat.update({key: value for key, value in (overrides or {}).items() if value is not None})
    sections = _split_sections(flat)

    experiment = _validate_section("experiment", sections["experiment"])
    train = _validate_section("train", sections["train"])
    env = _validate_section("env", sections["env"])
    esd = _validate_section("esd", sections["esd"])

    cfg = ExperimentConfig(
        envs=tuple(EnvKind(value) for value in experiment.get("envs", [kind.value for kind in EnvKind])),
        agents=tuple(AgentKind(value) for value in experiment.get("agents", [kind.value for kind in AgentKind])),
        seeds=tuple(experiment.get("seeds", DEFAULT_SEEDS)),
        n_rollouts=experiment.get("n_rollouts", 40),
        threshold=experiment.get("threshold", DEFAULT_THRESHOLD),
        output_dir=experiment.get("output_dir") or settings.DPRL_OUTPUT_DIR,
        demo_episodes=experiment.get("demo_episodes"),
        train=train,
        env=env,
        esd=esd,
    )
    logger.debug("Resolved config: %s", cfg.to_flat())
    return cfg
