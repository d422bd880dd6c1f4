"""
External state dynamics: a second-order hysteretic smoother over the signal.

The level z chases the observation with an asymmetric rate (slow on the way
up, fast on the way down) and carries a velocity v, so sustained change
accumulates while single-step reversals are damped. The resulting z_t is the
regression target of the auxiliary loss.

Update order is semi-implicit: z moves using the previous velocity, then the
velocity is refreshed from the move just made.
"""
from dataclasses import asdict, dataclass

import numpy as np

from dprl.utils.exceptions import ContractViolation

__all__ = ["EsdParams", "EsdState", "esd_init", "esd_step", "esd_trajectory"]


@dataclass(frozen=True)
class EsdParams:
    alpha_up: float = 0.15
    alpha_down: float = 0.4
    beta: float = 0.6
    clamp_output: bool = True

    def __post_init__(self):
        for name in ("alpha_up", "alpha_down"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ContractViolation(f"{name} must lie in (0, 1], got {value}", field=name)
        if not 0.0 <= self.beta <= 1.0:
            raise ContractViolation(f"beta must lie in [0, 1], got {self.beta}", field="beta")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class EsdState:
    z: float
    v: float = 0.0


def _check_unit(name, value):
    if not 0.0 <= value <= 1.0:
        raise ContractViolation(f"{name} must lie in [0, 1], got {value}", field=name)


def esd_init(s0):
    _check_unit("s0", s0)
    return EsdState(z=float(s0), v=0.0)


def esd_step(state, s, params):
    alpha = params.alpha_down if s < state.z else params.alpha_up
    z = alpha * s + (1.0 - alpha) * state.z + state.v
    if params.clamp_output:
        z = min(max(z, 0.0), 1.0)
    v = params.beta * (z - state.z) + (1.0 - params.beta) * state.v
    return EsdState(z=z, v=v)


def esd_trajectory(signal, params):
    """z_1..z_T, starting from esd_init(s_1)."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.size == 0:
        raise ContractViolation("signal must be non-empty", field="signal")
    if signal.min() < 0.0 or signal.max() > 1.0:
        raise ContractViolation("signal values must lie in [0, 1]", field="signal")

    state = esd_init(float(signal[0]))
    z = np.empty_like(signal)
    for t, s in enumerate(signal):
        state = esd_step(state, float(s), params)
        z[t] = state.z
    return z
