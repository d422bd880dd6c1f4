import csv
import json
import os
import tempfile
from io import StringIO
from unittest import mock

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from dprl.environments.envs import EnvKind
from dprl.experiments.acceptance import evaluate_acceptance, seed_check
from dprl.experiments.config import load_config
from dprl.experiments.runner import run_cell, run_demo, run_experiment
from dprl.training.trainer import AgentKind
from dprl.training.trainer import train as real_train
from dprl.utils.exceptions import ConfigError, TrainingAborted

# Keeps the end-to-end runs fast; shapes and determinism do not depend on scale.
SMALL = {
    "train.episodes": 3,
    "train.hidden": 8,
    "experiment.n_rollouts": 4,
    "experiment.seeds": [0],
}


def read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def read_bytes(path):
    with open(path, "rb") as handle:
        return handle.read()


class LoadConfigTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text, name="config.yaml"):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w") as handle:
            handle.write(text)
        return path

    def test_defaults(self):
        cfg = load_config()
        self.assertEqual(cfg.envs, (EnvKind.DRIFT, EnvKind.HOVER, EnvKind.WINDOW))
        self.assertEqual(cfg.agents, (AgentKind.REINFORCE, AgentKind.DPRL))
        self.assertEqual(cfg.seeds, (0, 1, 2, 3, 4))
        self.assertEqual(cfg.n_rollouts, 40)
        self.assertEqual((cfg.train.episodes, cfg.train.gamma, cfg.train.lam), (800, 0.99, 2.0))
        self.assertEqual(cfg.env.horizon, 100)
        self.assertEqual((cfg.esd.alpha_up, cfg.esd.alpha_down, cfg.esd.beta), (0.15, 0.4, 0.6))
        self.assertEqual(cfg.output_dir, settings.DPRL_OUTPUT_DIR)
        self.assertEqual(len(cfg.cells), 30)

    def test_lambda_override(self):
        self.assertEqual(load_config(overrides={"train.lambda": 0}).train.lam, 0.0)

    def test_unset_overrides_are_ignored(self):
        path = self.write("train.episodes: 12\n")
        cfg = load_config(path, {"train.episodes": None, "train.gamma": 0.9})
        self.assertEqual(cfg.train.episodes, 12)
        self.assertEqual(cfg.train.gamma, 0.9)

    def test_override_beats_file(self):
        path = self.write("train.lambda: 2.0\n")
        self.assertEqual(load_config(path, {"train.lambda": 0}).train.lam, 0.0)

    def test_empty_file_gives_defaults(self):
        self.assertEqual(load_config(self.write("")), load_config())

    def test_nested_sections_flatten(self):
        path = self.write("train:\n  lambda: 0.5\nenv:\n  window_lo: 40\n  window_hi: 50\nexperiment:\n  envs: window\n")
        cfg = load_config(path)
        self.assertEqual(cfg.train.lam, 0.5)
        self.assertEqual((cfg.env.window_lo, cfg.env.window_hi), (40, 50))
        self.assertEqual(cfg.envs, (EnvKind.WINDOW,))

    def test_selection_keywords(self):
        cfg = load_config(overrides={"experiment.envs": ["all"], "experiment.agents": "both", "experiment.seeds": 3})
        self.assertEqual(len(cfg.envs), 3)
        self.assertEqual(len(cfg.agents), 2)
        self.assertEqual(cfg.seeds, (3,))

    def test_selection_keeps_declaration_order(self):
        cfg = load_config(overrides={"experiment.envs": ["window", "drift", "window"]})
        self.assertEqual(cfg.envs, (EnvKind.DRIFT, EnvKind.WINDOW))

    def test_out_of_range_value_names_the_key(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config(overrides={"train.gamma": 1.5})
        self.assertEqual(ctx.exception.key, "train.gamma")
        self.assertTrue(str(ctx.exception).startswith("train.gamma:"))

    def test_dataclass_invariant_names_the_key(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config(overrides={"env.window_lo": 90})
        self.assertEqual(ctx.exception.key, "env.window_lo")

    def test_unknown_keys(self):
        for key in ("train.momentum", "bogus.value", "episodes"):
            with self.assertRaises(ConfigError) as ctx:
                load_config(overrides={key: 1})
            self.assertTrue(str(ctx.exception).startswith(key))

    def test_train_seed_is_not_configurable(self):
        with self.assertRaises(ConfigError):
            load_config(overrides={"train.seed": 1})

    def test_empty_selection_rejected(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config(overrides={"experiment.seeds": []})
        self.assertEqual(ctx.exception.key, "experiment.seeds")

    def test_malformed_yaml(self):
        with self.assertRaises(ConfigError):
            load_config(self.write("train: [1, 2\n"))

    def test_non_mapping_file(self):
        with self.assertRaises(ConfigError):
            load_config(self.write("- 1\n- 2\n"))

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config(os.path.join(self.tmp.name, "absent.yaml"))

    def test_flat_round_trip(self):
        cfg = load_config(overrides={"train.lambda": 0.25, "env.drift_onset_range": [10, 30], "esd.beta": 0.3})
        self.assertEqual(load_config(overrides=cfg.to_flat()), cfg)


class AcceptanceTests(SimpleTestCase):
    def metrics(self, **values):
        base = {
            "mean_jerk": 0.01,
            "mean_oscillations": 0.0,
            "timing_variance": 0.0,
            "n_committed": 0,
            "mean_curve": [0.1, 0.2, 0.3],
        }
        base.update(values)
        return base

    def test_drift_needs_fewer_oscillations_and_tighter_timing(self):
        reinforce = self.metrics(mean_oscillations=3.0, timing_variance=40.0)
        self.assertTrue(seed_check("drift", reinforce, self.metrics(mean_oscillations=1.0, timing_variance=5.0)))
        self.assertFalse(seed_check("drift", reinforce, self.metrics(mean_oscillations=1.0, timing_variance=50.0)))

    def test_hover_needs_flat_reinforce(self):
        dprl = self.metrics(mean_jerk=0.1, mean_oscillations=2.0)
        self.assertTrue(seed_check("hover", self.metrics(), dprl))
        self.assertFalse(seed_check("hover", self.metrics(mean_jerk=0.5, n_committed=10), dprl))

    def test_window_needs_rising_mean_curve(self):
        reinforce = self.metrics()
        self.assertTrue(seed_check("window", reinforce, self.metrics(mean_jerk=0.1, n_committed=5)))
        falling = self.metrics(mean_jerk=0.1, n_committed=5, mean_curve=[0.3, 0.2, 0.1])
        self.assertFalse(seed_check("window", reinforce, falling))

    def test_votes_and_failed_cells(self):
        ok = {"status": "ok"}
        cells = {}
        for seed in range(5):
            cells[(EnvKind.DRIFT, AgentKind.REINFORCE, seed)] = dict(
                ok, metrics=self.metrics(mean_oscillations=3.0, timing_variance=40.0)
            )
            cells[(EnvKind.DRIFT, AgentKind.DPRL, seed)] = dict(
                ok, metrics=self.metrics(mean_oscillations=1.0, timing_variance=5.0)
            )
        cells[(EnvKind.DRIFT, AgentKind.DPRL, 4)] = {"status": "failed", "metrics": None}

        report = evaluate_acceptance(cells, [EnvKind.DRIFT, EnvKind.HOVER], range(5))
        self.assertEqual(report["drift"]["votes"], 4)
        self.assertEqual(report["drift"]["required"], 4)
        self.assertTrue(report["drift"]["passed"])
        self.assertFalse(report["drift"]["per_seed"]["4"])
        self.assertNotIn("hover", report)


class RunExperimentTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def config(self, name, **overrides):
        values = dict(SMALL, **{"experiment.envs": ["drift"], "experiment.output_dir": os.path.join(self.tmp.name, name)})
        values.update(overrides)
        return load_config(overrides=values)

    def test_single_env_writes_one_row_and_two_of_everything_else(self):
        cfg = self.config("one")
        report = run_experiment(cfg)
        out = cfg.output_dir

        self.assertEqual(len(report.cells), 2)
        self.assertEqual(report.failures, [])
        for agent in ("reinforce", "dprl"):
            self.assertTrue(os.path.exists(os.path.join(out, f"checkpoint_drift_{agent}_0.json")))
            self.assertTrue(os.path.exists(os.path.join(out, f"curve_drift_{agent}_0.csv")))
            with open(os.path.join(out, f"traces_drift_{agent}.json")) as handle:
                bundle = json.load(handle)
            self.assertEqual(len(bundle["traces"]), 4)
            self.assertEqual(len(bundle["mean_curve"]), 100)

        table = read_rows(os.path.join(out, "table.csv"))
        self.assertEqual([row["env"] for row in table], ["drift"])
        self.assertEqual(len(read_rows(os.path.join(out, "metrics.csv"))), 2)

        curve = read_rows(os.path.join(out, "curve_drift_reinforce_0.csv"))
        self.assertEqual(len(curve), 3)
        self.assertEqual(curve[0]["esd_loss"], "")
        self.assertNotEqual(read_rows(os.path.join(out, "curve_drift_dprl_0.csv"))[0]["esd_loss"], "")

        with open(os.path.join(out, "summary.json")) as handle:
            summary = json.load(handle)
        self.assertIn("drift", summary["acceptance"])
        self.assertNotIn("experiment.output_dir", summary["config"])

    def test_rerun_is_byte_identical(self):
        first = self.config("first")
        second = self.config("second")
        run_experiment(first)
        run_experiment(second)
        for name in ("table.csv", "summary.json", "metrics.csv", "traces_drift_dprl.json"):
            self.assertEqual(
                read_bytes(os.path.join(first.output_dir, name)),
                read_bytes(os.path.join(second.output_dir, name)),
            )

    def test_lambda_zero_agents_coincide(self):
        cfg = self.config("lambda0", **{"train.lambda": 0})
        run_experiment(cfg)
        self.assertEqual(
            read_bytes(os.path.join(cfg.output_dir, "traces_drift_reinforce.json")).replace(b"reinforce", b"dprl"),
            read_bytes(os.path.join(cfg.output_dir, "traces_drift_dprl.json")),
        )

    def test_failed_cell_is_recorded_and_others_complete(self):
        def flaky(env, agent, *args, **kwargs):
            if agent is AgentKind.DPRL:
                raise TrainingAborted(1, float("nan"), None, env=env.value, agent=agent.value, seed=0)
            return real_train(env, agent, *args, **kwargs)

        cfg = self.config("flaky")
        with mock.patch("dprl.experiments.runner.train", side_effect=flaky):
            report = run_experiment(cfg)

        self.assertEqual([cell["agent"] for cell in report.failures], ["dprl"])
        rows = {row["agent"]: row for row in read_rows(os.path.join(cfg.output_dir, "metrics.csv"))}
        self.assertEqual(rows["dprl"]["status"], "failed")
        self.assertIn("episode 1", rows["dprl"]["error"])
        self.assertEqual(rows["reinforce"]["status"], "ok")
        self.assertEqual(read_rows(os.path.join(cfg.output_dir, "table.csv"))[0]["jerk_dprl"], "")
        self.assertFalse(report.acceptance["drift"]["passed"])
        with open(os.path.join(cfg.output_dir, "summary.json")) as handle:
            self.assertEqual(len(json.load(handle)["failures"]), 1)

    def test_run_cell_without_evaluation(self):
        cfg = self.config("train_only")
        cell = run_cell(cfg, "drift", "dprl", 0, evaluate=False)
        self.assertEqual(cell["status"], "ok")
        self.assertIsNone(cell["metrics"])
        self.assertTrue(os.path.exists(os.path.join(cfg.output_dir, "checkpoint_drift_dprl_0.json")))

    def test_demo_exports_signal_filter_and_both_traces(self):
        cfg = self.config("demo", **{"experiment.envs": ["hover", "window"], "experiment.demo_episodes": 2})
        paths = run_demo(cfg)
        self.assertEqual([os.path.basename(path) for path in paths], ["demo_hover.json", "demo_window.json"])
        with open(paths[1]) as handle:
            demo = json.load(handle)
        self.assertEqual(len(demo["s"]), 100)
        self.assertEqual(len(demo["z"]), 100)
        self.assertEqual(sorted(demo["p"]), ["dprl", "reinforce"])
        self.assertEqual(demo["failed"], {})


class CommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.config_path = os.path.join(self.tmp.name, "small.yaml")
        with open(self.config_path, "w") as handle:
            handle.write("train.hidden: 8\nexperiment.n_rollouts: 3\n")

    def call(self, name, *args):
        out = StringIO()
        call_command(
            name, "--config", self.config_path, "--seeds", "0", "--episodes", "2", "--out", self.tmp.name,
            *args, stdout=out,
        )
        return out.getvalue()

    def test_train_then_eval(self):
        output = self.call("train", "--env", "hover", "--agent", "reinforce")
        self.assertIn("Trained 1 of 1 cells", output)

        output = self.call("eval", "--env", "hover", "--agent", "reinforce")
        self.assertIn("Evaluated 1 cells", output)
        rows = read_rows(os.path.join(self.tmp.name, "metrics.csv"))
        self.assertEqual([(row["env"], row["agent"], row["status"]) for row in rows], [("hover", "reinforce", "ok")])

    def test_eval_without_checkpoint_reports_failure(self):
        output = self.call("eval", "--env", "window", "--agent", "dprl")
        self.assertIn("could not be evaluated", output)
        self.assertEqual(read_rows(os.path.join(self.tmp.name, "metrics.csv"))[0]["status"], "failed")

    def test_compare_prints_table(self):
        output = self.call("compare", "--env", "drift", "--lambda", "1.0")
        self.assertIn("env,jerk_reinforce,jerk_dprl", output)
        self.assertTrue(os.path.exists(os.path.join(self.tmp.name, "summary.json")))

    def test_demo_command(self):
        output = self.call("demo", "--env", "window", "--demo-episodes", "1")
        self.assertIn("demo_window.json", output)

    def test_invalid_flag_value_is_a_command_error(self):
        with self.assertRaisesMessage(CommandError, "train.gamma"):
            self.call("compare", "--gamma", "1.5")

    def test_esd_flags_reach_the_config(self):
        with self.assertRaisesMessage(CommandError, "esd.alpha_up"):
            self.call("demo", "--alpha-up", "0")
