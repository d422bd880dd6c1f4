"""
REINFORCE and DP-RL training loops.

Both agents share everything (network, rewards, optimiser, random streams);
the DP-RL agent adds lambda * mean_t (p_t - z_t)^2 to the loss, with z the
ESD trajectory of the episode's own signal.
"""
import enum
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from dprl.environments.envs import EnvConfig, EnvKind, episode_rewards, generate
from dprl.esd.dynamics import EsdParams, esd_trajectory
from dprl.policy.network import ACTIVATIONS, forward, grad_logprob, grad_mse, log_prob, policy_init
from dprl.policy.optim import adam_init, adam_step
from dprl.utils.exceptions import ContractViolation, TrainingAborted

logger = logging.getLogger(__name__)

__all__ = [
    "AgentKind",
    "TrainConfig",
    "EpisodeRecord",
    "LossReport",
    "TrainResult",
    "compute_returns",
    "run_episode",
    "episode_loss",
    "episode_gradient",
    "episode_update",
    "train",
]


class AgentKind(str, enum.Enum):
    REINFORCE = "reinforce"
    DPRL = "dprl"

    @property
    def label(self):
        return "REINFORCE" if self is AgentKind.REINFORCE else "DP-RL"


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 800
    gamma: float = 0.99
    lam: float = 2.0
    learn_rate: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    hidden: int = 32
    activation: str = "tanh"
    normalize_returns: bool = False
    seed: int = 0
    log_every: int = 100

    def __post_init__(self):
        if self.episodes < 0:
            raise ContractViolation("episodes must be non-negative", field="episodes")
        if not 0.0 < self.gamma <= 1.0:
            raise ContractViolation(f"gamma must lie in (0, 1], got {self.gamma}", field="gamma")
        if self.lam < 0.0:
            raise ContractViolation(f"lambda must be non-negative, got {self.lam}", field="lambda")
        if self.learn_rate <= 0.0:
            raise ContractViolation("learn_rate must be positive", field="learn_rate")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ContractViolation("adam betas must lie in [0, 1)", field="adam_beta1")
        if self.adam_eps <= 0.0:
            raise ContractViolation("adam_eps must be positive", field="adam_eps")
        if self.hidden < 1:
            raise ContractViolation("hidden must be at least 1", field="hidden")
        if self.activation not in ACTIVATIONS:
            raise ContractViolation(f"activation must be one of {ACTIVATIONS}", field="activation")

    def to_dict(self):
        data = asdict(self)
        data["lambda"] = data.pop("lam")
        return data


@dataclass(frozen=True)
class EpisodeRecord:
    signal: object
    s: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    p: np.ndarray
    z: np.ndarray = None

    @property
    def total_reward(self):
        return float(self.rewards.sum())


@dataclass(frozen=True)
class LossReport:
    rl_loss: float
    esd_loss: float = None

    @property
    def is_finite(self):
        return math.isfinite(self.rl_loss) and (self.esd_loss is None or math.isfinite(self.esd_loss))


@dataclass
class TrainResult:
    params: object
    total_reward: list = field(default_factory=list)
    rl_loss: list = field(default_factory=list)
    esd_loss: list = field(default_factory=list)

    def curve_rows(self):
        for episode, row in enumerate(zip(self.total_reward, self.rl_loss, self.esd_loss)):
            yield (episode,) + row


def compute_returns(rewards, gamma):
    """G_t = r_t + gamma * G_{t+1}, with G_{T+1} = 0."""
    rewards = np.asarray(rewards, dtype=np.float64)
    if rewards.size == 0:
        raise ContractViolation("rewards must be non-empty", field="rewards")
    returns = np.empty_like(rewards)
    running = 0.0
    for t in range(rewards.size - 1, -1, -1):
        running = rewards[t] + gamma * running
        returns[t] = running
    return returns


def run_episode(policy, env_signal, cfg, rng, kind=AgentKind.REINFORCE, env_cfg=None, esd_params=None):
    """
    Roll the policy along a pre-generated signal, sampling a_t ~ Bernoulli(p_t).

    The DP-RL record also carries the ESD targets of the same signal.
    """
    env_cfg = env_cfg or EnvConfig()
    p, _ = forward(policy, env_signal.s)
    actions = (rng.random(p.shape[0]) < p).astype(np.int64)
    rewards = episode_rewards(env_signal, actions, env_cfg)
    z = None
    if AgentKind(kind) is AgentKind.DPRL:
        z = esd_trajectory(env_signal.s, esd_params or EsdParams())
    return EpisodeRecord(signal=env_signal, s=env_signal.s, actions=actions, rewards=rewards, p=p, z=z)


def episode_loss(policy, record, kind, cfg):
    """The scalar loss whose gradient `episode_update` descends (fixed actions, returns and targets)."""
    returns = _returns(record, cfg)
    p, cache = forward(policy, record.s)
    return _loss_report(record, AgentKind(kind), returns, p, cache)


def _returns(record, cfg):
    returns = compute_returns(record.rewards, cfg.gamma)
    if cfg.normalize_returns:
        returns = (returns - returns.mean()) / (returns.std() + 1e-8)
    return returns


def _loss_report(record, kind, returns, p, cache):
    rl_loss = float(np.mean(-returns * log_prob(cache, record.actions)))
    esd_loss = None
    if kind is AgentKind.DPRL:
        esd_loss = float(np.mean((p - record.z) ** 2))
    return LossReport(rl_loss=rl_loss, esd_loss=esd_loss)


def episode_gradient(policy, record, kind, cfg):
    kind = AgentKind(kind)
    if kind is AgentKind.DPRL and record.z is None:
        raise ContractViolation("DP-RL update needs ESD targets on the record", field="z")

    horizon = record.s.shape[0]
    returns = _returns(record, cfg)
    p, cache = forward(policy, record.s)

    # d/dtheta of mean_t[-G_t log p(a_t|s_t)]
    grads = grad_logprob(policy, record.s, record.actions, cache, weights=-returns / horizon)
    if kind is AgentKind.DPRL:
        aux = grad_mse(policy, record.s, record.z, cache, weights=1.0 / horizon)
        grads = grads + aux.scale(cfg.lam)
    return grads, _loss_report(record, kind, returns, p, cache)


def episode_update(policy, record, kind, cfg, opt_state):
    """One Adam step on the episode's combined loss. Returns (policy', opt_state', loss_report)."""
    grads, report = episode_gradient(policy, record, kind, cfg)
    policy, opt_state = adam_step(
        policy,
        grads,
        opt_state,
        learn_rate=cfg.learn_rate,
        beta1=cfg.adam_beta1,
        beta2=cfg.adam_beta2,
        eps=cfg.adam_eps,
    )
    return policy, opt_state, report


def train(env_kind, agent_kind, cfg, rng, env_cfg=None, esd_params=None, init_rng=None):
    """
    Train a fresh policy for `cfg.episodes` episodes.

    `init_rng` draws the initial weights (defaults to `rng`); `rng` supplies the
    training signals and action samples. Raises TrainingAborted on a non-finite loss.
    """
    env_kind = EnvKind(env_kind)
    agent_kind = AgentKind(agent_kind)
    env_cfg = env_cfg or EnvConfig()
    esd_params = esd_params or EsdParams()

    policy = policy_init(cfg.hidden, init_rng or rng, activation=cfg.activation)
    opt_state = adam_init(policy)
    result = TrainResult(params=policy)

    for episode in range(cfg.episodes):
        signal = generate(env_kind, env_cfg, rng)
        record = run_episode(policy, signal, cfg, rng, kind=agent_kind, env_cfg=env_cfg, esd_params=esd_params)
        policy, opt_state, report = episode_update(policy, record, agent_kind, cfg, opt_state)

        if not report.is_finite or not policy.is_finite():
            logger.error(
                "Training aborted: %s/%s seed=%s episode=%d rl_loss=%r esd_loss=%r",
                env_kind.value, agent_kind.value, cfg.seed, episode, report.rl_loss, report.esd_loss,
            )
            raise TrainingAborted(
                episode, report.rl_loss, report.esd_loss,
                env=env_kind.value, agent=agent_kind.value, seed=cfg.seed,
            )

        result.total_reward.append(record.total_reward)
        result.rl_loss.append(report.rl_loss)
        result.esd_loss.append(report.esd_loss)

        if cfg.log_every and (episode + 1) % cfg.log_every == 0:
            logger.debug(
                "%s/%s seed=%s episode %d: reward=%.3f rl_loss=%.4f",
                env_kind.value, agent_kind.value, cfg.seed, episode + 1, record.total_reward, report.rl_loss,
            )

    result.params = policy
    if cfg.episodes:
        logger.info(
            "Trained %s on %s (seed=%s): %d episodes, last-100 mean reward %.3f",
            agent_kind.label, env_kind.value, cfg.seed, cfg.episodes, float(np.mean(result.total_reward[-100:])),
        )
    return result
