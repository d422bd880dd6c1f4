"""
Scalar-signal environments.

Three episode generators (drift, hover, window) and the per-step reward rule.
Signals never depend on the agent's actions, so an episode is fully
determined by (kind, config, random stream) and can be generated up front.
Timesteps are 1-indexed throughout: `s[t - 1]` is the observation at t.
"""
import enum
from dataclasses import asdict, dataclass, field

import numpy as np

from dprl.utils.exceptions import ContractViolation
from dprl.utils.functions import float_list

__all__ = [
    "EnvKind",
    "EnvConfig",
    "EpisodeSignal",
    "generate_drift",
    "generate_hover",
    "generate_window",
    "generate",
    "reward",
    "episode_rewards",
]


class EnvKind(str, enum.Enum):
    DRIFT = "drift"
    HOVER = "hover"
    WINDOW = "window"

    @property
    def code(self):
        """Stable integer used when deriving per-environment random streams."""
        return list(EnvKind).index(self)


def _check_level(name, value):
    if not 0.0 <= value <= 1.0:
        raise ContractViolation(f"{name} must lie in [0, 1], got {value}", field=name)


def _check_range(name, pair, horizon):
    lo, hi = pair
    if not 0 <= lo < hi < horizon:
        raise ContractViolation(
            f"{name} must satisfy 0 <= lo < hi < horizon ({horizon}), got [{lo}, {hi}]",
            field=name,
        )


@dataclass(frozen=True)
class EnvConfig:
    horizon: int = 100

    drift_onset_range: tuple = (20, 60)
    drift_base: float = 0.3
    drift_noise_sd: float = 0.05
    drift_ramp_noise_sd: float = 0.03
    drift_peak: float = 0.9

    hover_threshold: float = 0.5
    hover_jitter: float = 0.08
    hover_cross_range: tuple = (50, 70)
    hover_ramp_len: int = 15
    hover_peak: float = 0.9
    hover_settle_noise_sd: float = 0.02

    window_lo: int = 60
    window_hi: int = 80
    window_start: float = 0.1
    window_end: float = 0.9
    window_noise_sd: float = 0.02

    sustain_lag: int = 10
    reward_hit: float = 1.0
    reward_miss: float = -1.0
    reward_transient: float = -0.2

    def __post_init__(self):
        object.__setattr__(self, "drift_onset_range", tuple(int(v) for v in self.drift_onset_range))
        object.__setattr__(self, "hover_cross_range", tuple(int(v) for v in self.hover_cross_range))

        if self.horizon < 2:
            raise ContractViolation(f"horizon must be at least 2, got {self.horizon}", field="horizon")
        _check_range("drift_onset_range", self.drift_onset_range, self.horizon)
        _check_range("hover_cross_range", self.hover_cross_range, self.horizon)
        if not 0 < self.window_lo < self.window_hi <= self.horizon:
            raise ContractViolation(
                f"window must satisfy 0 < window_lo < window_hi <= horizon ({self.horizon}), "
                f"got [{self.window_lo}, {self.window_hi}]",
                field="window_lo",
            )
        if self.hover_ramp_len < 1:
            raise ContractViolation("hover_ramp_len must be at least 1", field="hover_ramp_len")
        if self.sustain_lag < 0:
            raise ContractViolation("sustain_lag must be non-negative", field="sustain_lag")

        for name in ("drift_base", "drift_peak", "hover_threshold", "hover_peak", "window_start", "window_end"):
            _check_level(name, getattr(self, name))
        for name in ("drift_noise_sd", "drift_ramp_noise_sd", "hover_jitter", "hover_settle_noise_sd", "window_noise_sd"):
            if getattr(self, name) < 0:
                raise ContractViolation(f"{name} must be non-negative", field=name)

    def to_dict(self):
        data = asdict(self)
        data["drift_onset_range"] = list(self.drift_onset_range)
        data["hover_cross_range"] = list(self.hover_cross_range)
        return data


@dataclass(frozen=True)
class EpisodeSignal:
    """One episode's exogenous observations plus the landmarks that define its rewards."""

    env: EnvKind
    s: np.ndarray
    landmarks: dict = field(default_factory=dict)
    seed: object = None

    @property
    def horizon(self):
        return int(self.s.shape[0])

    def to_json(self):
        return {
            "env": self.env.value,
            "seed": self.seed,
            "landmarks": dict(self.landmarks),
            "s": float_list(self.s),
        }


def _timesteps(horizon):
    return np.arange(1, horizon + 1, dtype=np.float64)


def generate_drift(cfg, rng, onset=None, seed=None):
    """Noisy plateau, then a linear climb from `drift_base` reaching `drift_peak` at t = T."""
    t = _timesteps(cfg.horizon)
    lo, hi = cfg.drift_onset_range
    t_onset = int(rng.integers(lo, hi + 1)) if onset is None else int(onset)

    plateau = cfg.drift_base + rng.normal(0.0, cfg.drift_noise_sd, cfg.horizon)
    slope = (cfg.drift_peak - cfg.drift_base) / max(cfg.horizon - t_onset, 1)
    ramp = cfg.drift_base + slope * (t - t_onset) + rng.normal(0.0, cfg.drift_ramp_noise_sd, cfg.horizon)

    s = np.clip(np.where(t < t_onset, plateau, ramp), 0.0, 1.0)
    return EpisodeSignal(EnvKind.DRIFT, s, {"t_onset": t_onset}, seed)


def generate_hover(cfg, rng, cross=None, seed=None):
    """Uniform jitter around the threshold, a linear ramp to `hover_peak`, then a noisy plateau."""
    t = _timesteps(cfg.horizon)
    lo, hi = cfg.hover_cross_range
    t_cross = int(rng.integers(lo, hi + 1)) if cross is None else int(cross)

    before = cfg.hover_threshold + rng.uniform(-cfg.hover_jitter, cfg.hover_jitter, cfg.horizon)
    ramp = cfg.hover_threshold + (cfg.hover_peak - cfg.hover_threshold) * (t - t_cross) / cfg.hover_ramp_len
    after = cfg.hover_peak + rng.normal(0.0, cfg.hover_settle_noise_sd, cfg.horizon)

    s = np.select(
        [t < t_cross, t < t_cross + cfg.hover_ramp_len],
        [before, ramp],
        default=after,
    )
    return EpisodeSignal(EnvKind.HOVER, np.clip(s, 0.0, 1.0), {"t_cross": t_cross}, seed)


def generate_window(cfg, rng, seed=None):
    """
    Steady climb from `window_start` at t = 1 to `window_end` at t = T.

    Timesteps are 1-indexed, so the trend is start + (end - start)(t - 1)/(T - 1)
    rather than start + (end - start)t/T, which would never emit `window_start`.
    """
    t = _timesteps(cfg.horizon)
    trend = cfg.window_start + (cfg.window_end - cfg.window_start) * (t - 1) / (cfg.horizon - 1)
    s = np.clip(trend + rng.normal(0.0, cfg.window_noise_sd, cfg.horizon), 0.0, 1.0)
    return EpisodeSignal(
        EnvKind.WINDOW, s, {"window_lo": cfg.window_lo, "window_hi": cfg.window_hi}, seed
    )


_GENERATORS = {
    EnvKind.DRIFT: generate_drift,
    EnvKind.HOVER: generate_hover,
    EnvKind.WINDOW: generate_window,
}


def generate(kind, cfg, rng, seed=None):
    return _GENERATORS[EnvKind(kind)](cfg, rng, seed=seed)


def _reward_after_event(t, event, cfg):
    if t < event:
        return cfg.reward_miss
    if t < event + cfg.sustain_lag:
        return cfg.reward_transient
    return cfg.reward_hit


def reward(env, t, a, cfg):
    """Reward for taking action `a` at timestep `t` (1-indexed). Inaction is always free."""
    if not 1 <= t <= env.horizon:
        raise ContractViolation(f"timestep {t} outside [1, {env.horizon}]", field="t")
    if a not in (0, 1):
        raise ContractViolation(f"action must be 0 or 1, got {a!r}", field="a")
    if a == 0:
        return 0.0

    if env.env is EnvKind.DRIFT:
        return _reward_after_event(t, env.landmarks["t_onset"], cfg)
    if env.env is EnvKind.HOVER:
        return _reward_after_event(t, env.landmarks["t_cross"], cfg)
    if env.landmarks["window_lo"] <= t <= env.landmarks["window_hi"]:
        return cfg.reward_hit
    return cfg.reward_miss


def episode_rewards(env, actions, cfg):
    """Vector form of `reward` over a whole episode of actions."""
    return np.array(
        [reward(env, t, int(a), cfg) for t, a in enumerate(actions, start=1)],
        dtype=np.float64,
    )
