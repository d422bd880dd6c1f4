"""
Directional checks comparing DP-RL against REINFORCE, seed by seed.

Exact metric values depend on unpublished reward and optimiser details, so
the comparison is on signs and orderings only. A check passes when at least
`ceil(0.8 * n_seeds)` seeds agree (4 of the default 5).
"""
import math

from dprl.environments.envs import EnvKind
from dprl.training.trainer import AgentKind
from dprl.utils.functions import least_squares_slope

__all__ = ["VOTE_FRACTION", "HOVER_FLAT_JERK", "seed_check", "evaluate_acceptance"]

VOTE_FRACTION = 0.8
HOVER_FLAT_JERK = 0.02


def _drift(reinforce, dprl):
    return (
        dprl["mean_oscillations"] < reinforce["mean_oscillations"]
        and dprl["timing_variance"] < reinforce["timing_variance"]
    )


def _hover(reinforce, dprl):
    flat = reinforce["n_committed"] == 0 or reinforce["mean_jerk"] < HOVER_FLAT_JERK
    return flat and dprl["mean_jerk"] > reinforce["mean_jerk"] and dprl["mean_oscillations"] > 0


def _window(reinforce, dprl):
    return (
        dprl["mean_jerk"] > reinforce["mean_jerk"]
        and dprl["n_committed"] > reinforce["n_committed"]
        and least_squares_slope(dprl["mean_curve"]) > 0.0
    )


_CHECKS = {
    EnvKind.DRIFT: _drift,
    EnvKind.HOVER: _hover,
    EnvKind.WINDOW: _window,
}


def seed_check(env, reinforce_metrics, dprl_metrics):
    return bool(_CHECKS[EnvKind(env)](reinforce_metrics, dprl_metrics))


def evaluate_acceptance(cells, envs, seeds):
    """
    `cells` maps (env, agent, seed) to a cell result. Environments missing an
    agent are skipped; a seed whose cell failed counts as a failed vote.
    """
    required = math.ceil(VOTE_FRACTION * len(seeds))
    report = {}
    for env in envs:
        env = EnvKind(env)
        per_seed = {}
        for seed in seeds:
            reinforce = cells.get((env, AgentKind.REINFORCE, seed))
            dprl = cells.get((env, AgentKind.DPRL, seed))
            if reinforce is None or dprl is None:
                break
            if reinforce["status"] != "ok" or dprl["status"] != "ok":
                per_seed[str(seed)] = False
                continue
            per_seed[str(seed)] = seed_check(env, reinforce["metrics"], dprl["metrics"])
        else:
            votes = sum(per_seed.values())
            report[env.value] = {
                "per_seed": per_seed,
                "votes": votes,
                "required": required,
                "passed": votes >= required,
            }
    return report
