"""
Temporal-geometry metrics over frozen-policy probability traces.

All timesteps reported here are 1-indexed, matching the environments.
"""
from dataclasses import dataclass, field

import numpy as np

from dprl.utils.exceptions import ContractViolation
from dprl.utils.functions import float_list

__all__ = [
    "DECISION_BOUNDARY",
    "DEFAULT_THRESHOLD",
    "RolloutTrace",
    "MetricSummary",
    "jerk",
    "oscillation_count",
    "decision_time",
    "aggregate",
]

DECISION_BOUNDARY = 0.5
DEFAULT_THRESHOLD = 0.6


@dataclass(frozen=True)
class RolloutTrace:
    p: np.ndarray
    landmarks: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=np.float64))


@dataclass(frozen=True)
class MetricSummary:
    mean_jerk: float
    mean_oscillations: float
    timing_variance: float
    timing_std: float
    mean_decision_time: float
    n_rollouts: int
    n_committed: int
    mean_curve: np.ndarray
    std_curve: np.ndarray

    @property
    def non_committal(self):
        """Fewer than two rollouts ever committed: a zero timing variance means nothing."""
        return self.n_committed < 2

    def to_dict(self, curves=True):
        data = {
            "mean_jerk": self.mean_jerk,
            "mean_oscillations": self.mean_oscillations,
            "timing_variance": self.timing_variance,
            "timing_std": self.timing_std,
            "mean_decision_time": self.mean_decision_time,
            "n_rollouts": self.n_rollouts,
            "n_committed": self.n_committed,
            "non_committal": self.non_committal,
        }
        if curves:
            data["mean_curve"] = float_list(self.mean_curve)
            data["std_curve"] = float_list(self.std_curve)
        return data


def _probabilities(trace):
    p = trace.p if isinstance(trace, RolloutTrace) else np.asarray(trace, dtype=np.float64)
    if p.size < 2:
        raise ContractViolation("a trace needs at least two timesteps", field="trace")
    return p


def jerk(trace):
    """Largest absolute one-step change in action probability."""
    return float(np.max(np.abs(np.diff(_probabilities(trace)))))


def oscillation_count(trace):
    """Flips across 0.5; a value of exactly 0.5 counts as the lower side."""
    above = _probabilities(trace) > DECISION_BOUNDARY
    return int(np.count_nonzero(above[1:] != above[:-1]))


def decision_time(trace, threshold=DEFAULT_THRESHOLD):
    """First t (1-indexed) with p_t strictly above `threshold`, or None."""
    p = trace.p if isinstance(trace, RolloutTrace) else np.asarray(trace, dtype=np.float64)
    hits = np.flatnonzero(p > threshold)
    if hits.size == 0:
        return None
    return int(hits[0]) + 1


def aggregate(traces, threshold=DEFAULT_THRESHOLD):
    traces = list(traces)
    if not traces:
        raise ContractViolation("aggregate needs at least one trace", field="traces")

    curves = np.vstack([trace.p for trace in traces])
    times = [decision_time(trace, threshold) for trace in traces]
    committed = np.array([t for t in times if t is not None], dtype=np.float64)

    if committed.size >= 2:
        timing_variance = float(np.var(committed))
    else:
        timing_variance = 0.0

    return MetricSummary(
        mean_jerk=float(np.mean([jerk(trace) for trace in traces])),
        mean_oscillations=float(np.mean([oscillation_count(trace) for trace in traces])),
        timing_variance=timing_variance,
        timing_std=float(np.sqrt(timing_variance)),
        mean_decision_time=float(committed.mean()) if committed.size else None,
        n_rollouts=len(traces),
        n_committed=int(committed.size),
        mean_curve=curves.mean(axis=0),
        std_curve=curves.std(axis=0),
    )
