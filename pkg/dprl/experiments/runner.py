"""
Experiment orchestration.

A cell is one (env, agent, seed) triple: train, checkpoint, roll out, aggregate.
Cells are independent and go through the Celery task `run_cell_task`; results
are gathered in the fixed order of `ExperimentConfig.cells`, so the files
written here never depend on which worker finished first.
"""
import logging
import os
from dataclasses import dataclass, field, replace

import numpy as np

from dprl.environments.envs import EnvKind, generate
from dprl.esd.dynamics import esd_trajectory
from dprl.evaluation.metrics import aggregate
from dprl.evaluation.rollouts import collect_rollouts
from dprl.experiments import writers
from dprl.experiments.acceptance import evaluate_acceptance
from dprl.policy.checkpoints import load_checkpoint, save_checkpoint
from dprl.policy.network import forward
from dprl.training.trainer import AgentKind, train
from dprl.utils.exceptions import ContractViolation, TrainingAborted
from dprl.utils.functions import cell_streams, float_list, write_json

logger = logging.getLogger(__name__)

__all__ = [
    "ExperimentReport",
    "run_cell",
    "evaluate_cell",
    "dispatch_cells",
    "train_cells",
    "evaluate_cells",
    "run_experiment",
    "run_demo",
]

STATUS_OK = "ok"
STATUS_FAILED = "failed"


@dataclass
class ExperimentReport:
    output_dir: str
    cells: list = field(default_factory=list)
    table: list = field(default_factory=list)
    acceptance: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    @property
    def failures(self):
        return [cell for cell in self.cells if cell["status"] != STATUS_OK]


def _cell_header(env, agent, seed):
    return {"env": EnvKind(env).value, "agent": AgentKind(agent).value, "seed": int(seed)}


def evaluate_cell(cfg, env, agent, seed, params):
    """Frozen-policy rollouts on the cell's evaluation stream, aggregated."""
    _, _, eval_rng = cell_streams(seed, EnvKind(env).code)
    traces = collect_rollouts(params, env, cfg.env, n=cfg.n_rollouts, rng=eval_rng)
    summary = aggregate(traces, threshold=cfg.threshold)
    return dict(
        _cell_header(env, agent, seed),
        status=STATUS_OK,
        error=None,
        metrics=summary.to_dict(curves=True),
        traces=[float_list(trace.p) for trace in traces],
    )


def run_cell(cfg, env, agent, seed, evaluate=True):
    """
    Train one cell, write its checkpoint and learning curve, then (optionally) evaluate.

    A non-finite loss is recorded as a failed cell instead of propagating.
    """
    env, agent = EnvKind(env), AgentKind(agent)
    init_rng, train_rng, _ = cell_streams(seed, env.code)
    train_cfg = replace(cfg.train, seed=int(seed))

    try:
        result = train(env, agent, train_cfg, train_rng, env_cfg=cfg.env, esd_params=cfg.esd, init_rng=init_rng)
    except TrainingAborted as exc:
        logger.error("Cell %s/%s/%s failed: %s", env.value, agent.value, seed, exc)
        return dict(_cell_header(env, agent, seed), status=STATUS_FAILED, error=str(exc), metrics=None, traces=[])

    save_checkpoint(writers.checkpoint_path(cfg.output_dir, env.value, agent.value, seed), result.params)
    writers.write_curve_csv(writers.curve_path(cfg.output_dir, env.value, agent.value, seed), result)

    if not evaluate:
        return dict(_cell_header(env, agent, seed), status=STATUS_OK, error=None, metrics=None, traces=[])
    return evaluate_cell(cfg, env, agent, seed, result.params)


def dispatch_cells(cfg, mode="run"):
    """Send every cell through the task queue; returns results in cell order."""
    from dprl.experiments.tasks import run_cell_task

    flat = cfg.to_flat()
    pending = [
        run_cell_task.delay({"config": flat, "env": env.value, "agent": agent.value, "seed": seed, "mode": mode})
        for env, agent, seed in cfg.cells
    ]
    return [job.get() for job in pending]


def train_cells(cfg):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return dispatch_cells(cfg, mode="train")


def _load_and_evaluate(cfg, env, agent, seed):
    path = writers.checkpoint_path(cfg.output_dir, env.value, agent.value, seed)
    try:
        params = load_checkpoint(path)
    except (OSError, ContractViolation) as exc:
        logger.error("Cannot evaluate %s/%s/%s: %s", env.value, agent.value, seed, exc)
        return dict(
            _cell_header(env, agent, seed),
            status=STATUS_FAILED,
            error=f"checkpoint unavailable: {os.path.basename(path)}",
            metrics=None,
            traces=[],
        )
    return evaluate_cell(cfg, env, agent, seed, params)


def evaluate_cells(cfg):
    """Evaluate previously written checkpoints and write metrics.csv plus trace bundles."""
    cells = [_load_and_evaluate(cfg, env, agent, seed) for env, agent, seed in cfg.cells]
    files = _write_evaluation_files(cfg, cells)
    return ExperimentReport(output_dir=cfg.output_dir, cells=cells, files=files)


def _by_key(cells):
    return {(EnvKind(c["env"]), AgentKind(c["agent"]), c["seed"]): c for c in cells}


def _trace_bundle(env, agent, cells):
    ok = [cell for cell in cells if cell["status"] == STATUS_OK]
    traces = [trace for cell in ok for trace in cell["traces"]]
    bundle = {
        "env": env.value,
        "agent": agent.value,
        "seeds": [cell["seed"] for cell in ok],
        "failed_seeds": [cell["seed"] for cell in cells if cell["status"] != STATUS_OK],
        "traces": traces,
        "mean_curve": [],
        "std_curve": [],
        "per_seed": {str(cell["seed"]): cell["metrics"] for cell in ok},
    }
    if traces:
        pooled = np.asarray(traces, dtype=np.float64)
        bundle["mean_curve"] = float_list(pooled.mean(axis=0))
        bundle["std_curve"] = float_list(pooled.std(axis=0))
    return bundle


def _write_evaluation_files(cfg, cells):
    files = []
    metrics_path = os.path.join(cfg.output_dir, "metrics.csv")
    writers.write_metrics_csv(metrics_path, cells)
    files.append(metrics_path)

    for env in cfg.envs:
        for agent in cfg.agents:
            group = [c for c in cells if c["env"] == env.value and c["agent"] == agent.value]
            path = writers.trace_bundle_path(cfg.output_dir, env.value, agent.value)
            writers.write_trace_bundle(path, _trace_bundle(env, agent, group))
            files.append(path)
    return files


_TABLE_METRICS = (
    ("jerk", "mean_jerk"),
    ("oscillations", "mean_oscillations"),
    ("timing_variance", "timing_variance"),
)
_AVERAGED = ("mean_jerk", "mean_oscillations", "timing_variance", "timing_std", "n_committed")


def _seed_average(cells):
    ok = [cell["metrics"] for cell in cells if cell["status"] == STATUS_OK]
    if not ok:
        return None
    return {name: float(np.mean([metrics[name] for metrics in ok])) for name in _AVERAGED}


def _averages(cfg, cells):
    averages = {}
    for env in cfg.envs:
        averages[env.value] = {}
        for agent in cfg.agents:
            group = [c for c in cells if c["env"] == env.value and c["agent"] == agent.value]
            averages[env.value][agent.value] = _seed_average(group)
    return averages


def _table(cfg, averages):
    rows = []
    for env in cfg.envs:
        row = {"env": env.value}
        for column, metric in _TABLE_METRICS:
            for agent in AgentKind:
                average = averages[env.value].get(agent.value)
                row[f"{column}_{agent.value}"] = average[metric] if average else None
        rows.append(row)
    return rows


def _summary(cfg, cells, averages, acceptance):
    config = cfg.to_flat()
    # Keep the summary free of machine-specific paths.
    config.pop("experiment.output_dir", None)
    return {
        "config": config,
        "cells": [{key: value for key, value in cell.items() if key != "traces"} for cell in _strip_curves(cells)],
        "seed_averages": averages,
        "failures": [
            {"env": c["env"], "agent": c["agent"], "seed": c["seed"], "error": c["error"]}
            for c in cells
            if c["status"] != STATUS_OK
        ],
        "acceptance": acceptance,
    }


def _strip_curves(cells):
    for cell in cells:
        metrics = cell.get("metrics")
        if metrics:
            metrics = {key: value for key, value in metrics.items() if key not in ("mean_curve", "std_curve")}
        yield dict(cell, metrics=metrics)


def run_experiment(cfg):
    """Train and evaluate every cell, then write the comparison table and summary."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    logger.info(
        "Running %d cells (%s x %s x seeds %s) into %s",
        len(cfg.cells),
        ",".join(kind.value for kind in cfg.envs),
        ",".join(kind.value for kind in cfg.agents),
        ",".join(str(seed) for seed in cfg.seeds),
        cfg.output_dir,
    )
    cells = dispatch_cells(cfg, mode="run")
    files = _write_evaluation_files(cfg, cells)

    averages = _averages(cfg, cells)
    table = _table(cfg, averages)
    acceptance = evaluate_acceptance(_by_key(cells), cfg.envs, cfg.seeds)

    table_path = os.path.join(cfg.output_dir, "table.csv")
    writers.write_table_csv(table_path, table)
    summary_path = os.path.join(cfg.output_dir, "summary.json")
    write_json(summary_path, _summary(cfg, cells, averages, acceptance))
    files += [table_path, summary_path]

    for cell in cells:
        if cell["status"] == STATUS_OK:
            files.append(writers.checkpoint_path(cfg.output_dir, cell["env"], cell["agent"], cell["seed"]))
            files.append(writers.curve_path(cfg.output_dir, cell["env"], cell["agent"], cell["seed"]))

    report = ExperimentReport(output_dir=cfg.output_dir, cells=cells, table=table, acceptance=acceptance, files=files)
    if report.failures:
        logger.warning("%d of %d cells failed", len(report.failures), len(cells))
    return report


def run_demo(cfg):
    """
    One representative episode per environment: the signal, its ESD trajectory
    and both agents' probability traces on that same signal.
    """
    seed = cfg.seeds[0]
    episodes = cfg.train.episodes if cfg.demo_episodes is None else cfg.demo_episodes
    train_cfg = replace(cfg.train, episodes=episodes, seed=seed)
    os.makedirs(cfg.output_dir, exist_ok=True)

    paths = []
    for env in cfg.envs:
        _, _, eval_stream = cell_streams(seed, env.code)
        signal = generate(env, cfg.env, eval_stream, seed=seed)
        record = signal.to_json()
        record["z"] = float_list(esd_trajectory(signal.s, cfg.esd))
        record["p"] = {}
        record["failed"] = {}

        for agent in cfg.agents:
            # Fresh copies of the cell streams so each agent starts from the same draws.
            init_rng, train_rng, _ = cell_streams(seed, env.code)
            try:
                result = train(env, agent, train_cfg, train_rng, env_cfg=cfg.env, esd_params=cfg.esd, init_rng=init_rng)
            except TrainingAborted as exc:
                record["failed"][agent.value] = str(exc)
                continue
            p, _ = forward(result.params, signal.s)
            record["p"][agent.value] = float_list(p)

        path = os.path.join(cfg.output_dir, f"demo_{env.value}.json")
        write_json(path, record)
        paths.append(path)
        logger.info("Wrote demo trace for %s to %s", env.value, path)
    return paths
