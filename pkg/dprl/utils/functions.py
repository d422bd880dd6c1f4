import json
import os

import numpy as np


def cell_streams(seed, env_code, n_streams=3):
    """
    Independent generators for one (env, seed) cell: init, train, eval.

    The agent kind is not an input: both agents of a cell get the same
    initial weights, training signals and action noise.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=(env_code,))
    return [np.random.default_rng(child) for child in sequence.spawn(n_streams)]


def float_list(values):
    """Plain Python floats, suitable for JSON and Celery payloads."""
    return [float(value) for value in np.asarray(values, dtype=np.float64).ravel()]


def format_float(value):
    if value is None:
        return ""
    return format(float(value), ".10g")


def least_squares_slope(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return 0.0
    return float(np.polyfit(np.arange(values.size, dtype=np.float64), values, 1)[0])


def write_json(path, payload):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)
