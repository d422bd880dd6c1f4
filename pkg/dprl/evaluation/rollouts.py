from dprl.environments.envs import EnvConfig, generate
from dprl.evaluation.metrics import RolloutTrace
from dprl.policy.network import forward
from dprl.utils.exceptions import ContractViolation

__all__ = ["collect_rollouts"]


def collect_rollouts(policy, env_kind, cfg=None, n=40, rng=None):
    """
    Record p_t along `n` freshly generated signals. Nothing is sampled or
    executed, so the only randomness consumed is the signal generation.
    """
    if n < 1:
        raise ContractViolation(f"n must be at least 1, got {n}", field="n")
    if rng is None:
        raise ContractViolation("collect_rollouts needs a dedicated random stream", field="rng")
    cfg = cfg or EnvConfig()

    traces = []
    for _ in range(n):
        signal = generate(env_kind, cfg, rng)
        p, _ = forward(policy, signal.s)
        traces.append(RolloutTrace(p=p, landmarks=dict(signal.landmarks)))
    return traces
