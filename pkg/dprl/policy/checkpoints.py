"""Flat JSON checkpoints for freeze-then-evaluate workflows."""
import numpy as np

from dprl.policy.network import PolicyParams
from dprl.utils.exceptions import ContractViolation
from dprl.utils.functions import float_list, read_json, write_json

__all__ = ["params_to_dict", "params_from_dict", "save_checkpoint", "load_checkpoint"]


def params_to_dict(params):
    return {
        "hidden": int(params.hidden),
        "activation": params.activation,
        "w1": float_list(params.w1),
        "b1": float_list(params.b1),
        "w2": float_list(params.w2),
        "b2": float(params.b2),
    }


def params_from_dict(data):
    try:
        hidden = int(data["hidden"])
        return PolicyParams(
            w1=np.asarray(data["w1"], dtype=np.float64).reshape(hidden, 1),
            b1=np.asarray(data["b1"], dtype=np.float64).reshape(hidden),
            w2=np.asarray(data["w2"], dtype=np.float64).reshape(1, hidden),
            b2=float(data["b2"]),
            activation=data.get("activation", "tanh"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ContractViolation(f"malformed checkpoint: {exc}", field="checkpoint") from exc


def save_checkpoint(path, params):
    write_json(path, params_to_dict(params))


def load_checkpoint(path):
    return params_from_dict(read_json(path))
