import logging

from celery import shared_task

from dprl.experiments.config import load_config
from dprl.experiments.runner import run_cell

logger = logging.getLogger(__name__)


@shared_task(name="dprl.experiments.run_cell")
def run_cell_task(payload):
    """
    Run one experiment cell from a JSON payload:
    {config: <flat dotted keys>, env, agent, seed, mode: "run" | "train"}.
    """
    cfg = load_config(overrides=payload["config"])
    logger.debug("Cell %s/%s/%s (%s)", payload["env"], payload["agent"], payload["seed"], payload["mode"])
    return run_cell(cfg, payload["env"], payload["agent"], payload["seed"], evaluate=payload["mode"] == "run")
