import json

import numpy as np
from django.test import SimpleTestCase

from dprl.environments.envs import (
    EnvConfig,
    EnvKind,
    EpisodeSignal,
    episode_rewards,
    generate,
    generate_drift,
    generate_hover,
    generate_window,
    reward,
)
from dprl.utils.exceptions import ContractViolation


class EnvConfigTests(SimpleTestCase):
    def test_defaults(self):
        cfg = EnvConfig()
        self.assertEqual(cfg.horizon, 100)
        self.assertEqual(cfg.drift_onset_range, (20, 60))
        self.assertEqual((cfg.window_lo, cfg.window_hi), (60, 80))
        self.assertEqual(cfg.reward_transient, -0.2)

    def test_rejects_onset_range_past_horizon(self):
        with self.assertRaises(ContractViolation) as ctx:
            EnvConfig(drift_onset_range=(20, 100))
        self.assertEqual(ctx.exception.field, "drift_onset_range")

    def test_rejects_inverted_window(self):
        with self.assertRaises(ContractViolation):
            EnvConfig(window_lo=80, window_hi=60)

    def test_rejects_level_outside_unit_interval(self):
        with self.assertRaises(ContractViolation):
            EnvConfig(hover_threshold=1.2)


class DriftTests(SimpleTestCase):
    def test_noiseless_ramp_endpoints(self):
        cfg = EnvConfig(drift_noise_sd=0.0, drift_ramp_noise_sd=0.0, drift_base=0.3)
        signal = generate_drift(cfg, np.random.default_rng(0), onset=50)
        self.assertEqual(signal.landmarks, {"t_onset": 50})
        self.assertAlmostEqual(signal.s[50 - 1], 0.3, places=12)
        self.assertAlmostEqual(signal.s[100 - 1], 0.9, places=12)
        np.testing.assert_allclose(signal.s[:49], 0.3)

    def test_bounded_and_full_length(self):
        cfg = EnvConfig()
        for seed in range(50):
            signal = generate_drift(cfg, np.random.default_rng(seed))
            self.assertEqual(signal.s.shape, (100,))
            self.assertTrue(np.all((signal.s >= 0.0) & (signal.s <= 1.0)))
            self.assertTrue(20 <= signal.landmarks["t_onset"] <= 60)

    def test_same_seed_reproduces_bit_exactly(self):
        first = generate_drift(EnvConfig(), np.random.default_rng(42))
        second = generate_drift(EnvConfig(), np.random.default_rng(42))
        np.testing.assert_array_equal(first.s, second.s)
        self.assertEqual(first.landmarks, second.landmarks)


class HoverTests(SimpleTestCase):
    def test_noiseless_ramp(self):
        cfg = EnvConfig(hover_jitter=0.0, hover_ramp_len=10, hover_settle_noise_sd=0.0)
        signal = generate_hover(cfg, np.random.default_rng(0), cross=60)
        np.testing.assert_array_equal(signal.s[:59], 0.5)
        self.assertAlmostEqual(signal.s[60 - 1], 0.5, places=12)
        self.assertAlmostEqual(signal.s[65 - 1], 0.7, places=12)
        self.assertAlmostEqual(signal.s[70 - 1], 0.9, places=12)

    def test_pre_crossing_stays_within_jitter_band(self):
        cfg = EnvConfig()
        rng = np.random.default_rng(7)
        for _ in range(1000):
            signal = generate_hover(cfg, rng)
            before = signal.s[: signal.landmarks["t_cross"] - 1]
            self.assertTrue(np.all(before >= cfg.hover_threshold - cfg.hover_jitter))
            self.assertTrue(np.all(before <= cfg.hover_threshold + cfg.hover_jitter))

    def test_reaches_the_peak(self):
        cfg = EnvConfig()
        for seed in range(50):
            signal = generate_hover(cfg, np.random.default_rng(seed))
            self.assertGreaterEqual(signal.s.max(), 0.9 - 3 * 0.02)
            self.assertTrue(np.all((signal.s >= 0.0) & (signal.s <= 1.0)))


class WindowTests(SimpleTestCase):
    def test_noiseless_trend(self):
        signal = generate_window(EnvConfig(window_noise_sd=0.0), np.random.default_rng(0))
        self.assertAlmostEqual(signal.s[0], 0.1, places=12)
        self.assertAlmostEqual(signal.s[-1], 0.9, places=12)
        self.assertAlmostEqual(signal.s[49], 0.1 + 0.8 * 49 / 99, places=12)
        self.assertTrue(np.all(np.diff(signal.s) > 0))
        self.assertEqual(signal.landmarks, {"window_lo": 60, "window_hi": 80})

    def test_positive_slope_for_every_seed(self):
        t = np.arange(1, 101)
        for seed in range(100):
            signal = generate_window(EnvConfig(), np.random.default_rng(seed))
            slope = np.polyfit(t, signal.s, 1)[0]
            self.assertGreater(slope, 0.0)
            self.assertTrue(np.all((signal.s >= 0.0) & (signal.s <= 1.0)))

    def test_generate_dispatches_on_kind(self):
        signal = generate("window", EnvConfig(), np.random.default_rng(1), seed=1)
        self.assertIs(signal.env, EnvKind.WINDOW)
        payload = json.loads(json.dumps(signal.to_json()))
        self.assertEqual(payload["env"], "window")
        self.assertEqual(payload["seed"], 1)
        self.assertEqual(len(payload["s"]), 100)


class RewardTests(SimpleTestCase):
    cfg = EnvConfig()

    def _signal(self, kind, **landmarks):
        return EpisodeSignal(kind, np.full(100, 0.5), landmarks)

    def test_inaction_is_free(self):
        signals = [
            self._signal(EnvKind.DRIFT, t_onset=50),
            self._signal(EnvKind.HOVER, t_cross=60),
            self._signal(EnvKind.WINDOW, window_lo=60, window_hi=80),
        ]
        for signal in signals:
            for t in range(1, 101):
                self.assertEqual(reward(signal, t, 0, self.cfg), 0.0)

    def test_window_hit(self):
        signal = self._signal(EnvKind.WINDOW, window_lo=60, window_hi=80)
        self.assertEqual(reward(signal, 70, 1, self.cfg), 1.0)
        self.assertEqual(reward(signal, 60, 1, self.cfg), 1.0)
        self.assertEqual(reward(signal, 80, 1, self.cfg), 1.0)
        self.assertEqual(reward(signal, 59, 1, self.cfg), -1.0)
        self.assertEqual(reward(signal, 81, 1, self.cfg), -1.0)

    def test_drift_cases(self):
        signal = self._signal(EnvKind.DRIFT, t_onset=50)
        self.assertEqual(reward(signal, 49, 1, self.cfg), -1.0)
        self.assertEqual(reward(signal, 55, 1, self.cfg), -0.2)
        self.assertEqual(reward(signal, 60, 1, self.cfg), 1.0)

    def test_hover_cases(self):
        signal = self._signal(EnvKind.HOVER, t_cross=60)
        self.assertEqual(reward(signal, 59, 1, self.cfg), -1.0)
        self.assertEqual(reward(signal, 69, 1, self.cfg), -0.2)
        self.assertEqual(reward(signal, 70, 1, self.cfg), 1.0)

    def test_out_of_range_timestep(self):
        signal = self._signal(EnvKind.DRIFT, t_onset=50)
        for t in (0, 101):
            with self.assertRaises(ContractViolation):
                reward(signal, t, 1, self.cfg)

    def test_episode_rewards_match_pointwise(self):
        signal = self._signal(EnvKind.DRIFT, t_onset=50)
        actions = np.random.default_rng(3).integers(0, 2, 100)
        expected = [reward(signal, t, int(a), self.cfg) for t, a in enumerate(actions, start=1)]
        np.testing.assert_array_equal(episode_rewards(signal, actions, self.cfg), expected)
