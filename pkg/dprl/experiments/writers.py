"""CSV / JSON output files. Every writer is deterministic: same input, same bytes."""
import csv
import os

from dprl.utils.functions import format_float, write_json

__all__ = [
    "CURVE_HEADERS",
    "METRIC_HEADERS",
    "TABLE_HEADERS",
    "checkpoint_path",
    "curve_path",
    "trace_bundle_path",
    "write_curve_csv",
    "write_metrics_csv",
    "write_table_csv",
    "write_trace_bundle",
    "write_json",
]

CURVE_HEADERS = ["episode", "total_reward", "rl_loss", "esd_loss"]
METRIC_HEADERS = [
    "env",
    "agent",
    "seed",
    "status",
    "mean_jerk",
    "mean_oscillations",
    "timing_variance",
    "timing_std",
    "n_committed",
    "n_rollouts",
    "error",
]
TABLE_HEADERS = [
    "env",
    "jerk_reinforce",
    "jerk_dprl",
    "oscillations_reinforce",
    "oscillations_dprl",
    "timing_variance_reinforce",
    "timing_variance_dprl",
]


def checkpoint_path(out_dir, env, agent, seed):
    return os.path.join(out_dir, f"checkpoint_{env}_{agent}_{seed}.json")


def curve_path(out_dir, env, agent, seed):
    return os.path.join(out_dir, f"curve_{env}_{agent}_{seed}.csv")


def trace_bundle_path(out_dir, env, agent):
    return os.path.join(out_dir, f"traces_{env}_{agent}.json")


def _write_rows(path, headers, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows(rows)


def _cell(value):
    if isinstance(value, float) or value is None:
        return format_float(value)
    return value


def write_curve_csv(path, train_result):
    rows = [
        (episode, format_float(reward), format_float(rl_loss), format_float(esd_loss))
        for episode, reward, rl_loss, esd_loss in train_result.curve_rows()
    ]
    _write_rows(path, CURVE_HEADERS, rows)


def write_metrics_csv(path, cells):
    """One row per (env, agent, seed) cell; failed cells keep their error and blank metrics."""
    rows = []
    for cell in cells:
        metrics = cell.get("metrics") or {}
        rows.append([
            cell["env"],
            cell["agent"],
            cell["seed"],
            cell["status"],
            _cell(metrics.get("mean_jerk")),
            _cell(metrics.get("mean_oscillations")),
            _cell(metrics.get("timing_variance")),
            _cell(metrics.get("timing_std")),
            metrics.get("n_committed", ""),
            metrics.get("n_rollouts", ""),
            cell.get("error") or "",
        ])
    _write_rows(path, METRIC_HEADERS, rows)


def write_table_csv(path, table_rows):
    rows = [[row["env"]] + [_cell(row.get(header)) for header in TABLE_HEADERS[1:]] for row in table_rows]
    _write_rows(path, TABLE_HEADERS, rows)


def write_trace_bundle(path, bundle):
    write_json(path, bundle)
