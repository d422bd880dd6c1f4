"""
Two-layer MLP policy: scalar observation -> probability of acting.

    h     = act(w1 * s + b1)          (hidden,)
    logit = w2 . h + b2
    p     = sigmoid(logit)

Both agents use this exact module. Gradients are closed-form backprop through
the two layers; `forward` accepts a scalar or a whole episode of observations,
and the gradient functions take matching `a` / `target` arrays and return the
gradient of the per-timestep quantity summed with optional `weights`.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

from dprl.utils.exceptions import ContractViolation

__all__ = [
    "ACTIVATIONS",
    "PolicyParams",
    "PolicyGrads",
    "ForwardCache",
    "policy_init",
    "forward",
    "log_prob",
    "grad_logprob",
    "grad_mse",
]

# Keeps p strictly inside (0, 1) once the logit saturates double precision.
_P_EPS = np.finfo(np.float64).eps

ACTIVATIONS = ("tanh", "relu")


@dataclass(frozen=True)
class PolicyParams:
    w1: np.ndarray  # (hidden, 1)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (1, hidden)
    b2: float
    activation: str = "tanh"

    def __post_init__(self):
        hidden = self.w1.shape[0]
        if hidden < 1:
            raise ContractViolation("hidden must be at least 1", field="hidden")
        if self.w1.shape != (hidden, 1) or self.b1.shape != (hidden,) or self.w2.shape != (1, hidden):
            raise ContractViolation("parameter shapes are inconsistent", field="hidden")
        if self.activation not in ACTIVATIONS:
            raise ContractViolation(f"unknown activation {self.activation!r}", field="activation")

    @property
    def hidden(self):
        return self.w1.shape[0]

    def arrays(self):
        return (self.w1, self.b1, self.w2, np.float64(self.b2))

    def replace(self, w1, b1, w2, b2):
        return PolicyParams(w1=w1, b1=b1, w2=w2, b2=float(b2), activation=self.activation)

    def zeros_like(self):
        return PolicyParams(
            w1=np.zeros_like(self.w1),
            b1=np.zeros_like(self.b1),
            w2=np.zeros_like(self.w2),
            b2=0.0,
            activation=self.activation,
        )

    def is_finite(self):
        return all(np.all(np.isfinite(array)) for array in self.arrays())

    def __add__(self, other):
        return self.replace(*(mine + theirs for mine, theirs in zip(self.arrays(), other.arrays())))

    def scale(self, factor):
        return self.replace(*(array * factor for array in self.arrays()))


# Gradients share the parameter layout.
PolicyGrads = PolicyParams


@dataclass(frozen=True)
class ForwardCache:
    s: np.ndarray       # (n,)
    pre: np.ndarray     # (n, hidden)
    h: np.ndarray       # (n, hidden)
    logit: np.ndarray   # (n,)
    p: np.ndarray       # (n,)


def policy_init(hidden, rng, activation="tanh"):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    if hidden < 1:
        raise ContractViolation(f"hidden must be at least 1, got {hidden}", field="hidden")
    w1 = rng.uniform(-1.0, 1.0, size=(hidden, 1))
    bound = 1.0 / np.sqrt(hidden)
    w2 = rng.uniform(-bound, bound, size=(1, hidden))
    return PolicyParams(w1=w1, b1=np.zeros(hidden), w2=w2, b2=0.0, activation=activation)


def _activate(pre, activation):
    if activation == "relu":
        return np.maximum(pre, 0.0)
    return np.tanh(pre)


def _activate_grad(pre, h, activation):
    if activation == "relu":
        return (pre > 0.0).astype(np.float64)
    return 1.0 - h * h


def forward(params, s):
    """
    Action probability for one observation or a batch.

    Returns (p, cache); p has the shape of `s` (a float for scalar input).
    """
    obs = np.atleast_1d(np.asarray(s, dtype=np.float64))
    pre = np.outer(obs, params.w1[:, 0]) + params.b1
    h = _activate(pre, params.activation)
    logit = h @ params.w2[0] + params.b2
    p = np.clip(expit(logit), _P_EPS, 1.0 - _P_EPS)
    cache = ForwardCache(s=obs, pre=pre, h=h, logit=logit, p=p)
    if np.ndim(s) == 0:
        return float(p[0]), cache
    return p, cache


def log_prob(cache, a):
    """log p(a | s) per timestep, computed from the logit so it stays finite."""
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    return a * log_expit(cache.logit) + (1.0 - a) * log_expit(-cache.logit)


def _backprop(params, cache, dlogit):
    """Push per-timestep d(quantity)/d(logit) through both layers, summing over timesteps."""
    dw2 = (dlogit @ cache.h)[np.newaxis, :]
    db2 = float(dlogit.sum())
    dh = np.outer(dlogit, params.w2[0])
    dpre = dh * _activate_grad(cache.pre, cache.h, params.activation)
    dw1 = (cache.s @ dpre)[:, np.newaxis]
    db1 = dpre.sum(axis=0)
    return params.replace(dw1, db1, dw2, db2)


def _weights(weights, n):
    if weights is None:
        return np.ones(n)
    return np.broadcast_to(np.asarray(weights, dtype=np.float64), (n,))


def grad_logprob(params, s, a, cache, weights=None):
    """
    d/dtheta of sum_t w_t * log p(a_t | s_t).

    The logit-level derivative of a Bernoulli log-likelihood is (a - p).
    `s` is accepted for signature symmetry; the cache already holds it.
    """
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    if a.shape != cache.p.shape:
        raise ContractViolation("actions and cached observations differ in length", field="a")
    dlogit = _weights(weights, a.size) * (a - cache.p)
    return _backprop(params, cache, dlogit)


def grad_mse(params, s, target, cache, weights=None):
    """
    d/dtheta of sum_t w_t * (p_t - target_t)^2.

    Logit-level derivative: 2 (p - target) p (1 - p).
    """
    target = np.atleast_1d(np.asarray(target, dtype=np.float64))
    if target.shape != cache.p.shape:
        raise ContractViolation("targets and cached observations differ in length", field="target")
    p = cache.p
    dlogit = _weights(weights, p.size) * 2.0 * (p - target) * p * (1.0 - p)
    return _backprop(params, cache, dlogit)
