from dataclasses import dataclass

import numpy as np

__all__ = ["AdamState", "adam_init", "adam_step"]


@dataclass(frozen=True)
class AdamState:
    step: int
    m: tuple
    v: tuple


def adam_init(params):
    zeros = tuple(np.zeros_like(np.asarray(array, dtype=np.float64)) for array in params.arrays())
    return AdamState(step=0, m=zeros, v=zeros)


def adam_step(params, grads, state, learn_rate=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
    """
    One descent step on `grads` (gradient of the loss to minimise).

    Returns (new_params, new_state); inputs are left untouched. A zero gradient
    on a fresh state leaves the parameters exactly where they were.
    """
    step = state.step + 1
    new_m, new_v, new_arrays = [], [], []
    for theta, g, m, v in zip(params.arrays(), grads.arrays(), state.m, state.v):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** step)
        v_hat = v / (1.0 - beta2 ** step)
        new_arrays.append(theta - learn_rate * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(m)
        new_v.append(v)
    return params.replace(*new_arrays), AdamState(step=step, m=tuple(new_m), v=tuple(new_v))
