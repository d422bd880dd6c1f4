from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from dprl.environments.envs import EnvConfig, EnvKind, EpisodeSignal, generate
from dprl.esd.dynamics import EsdParams, esd_trajectory
from dprl.evaluation.metrics import aggregate
from dprl.evaluation.rollouts import collect_rollouts
from dprl.policy.network import PolicyParams, policy_init
from dprl.policy.optim import adam_init
from dprl.training.trainer import (
    AgentKind,
    EpisodeRecord,
    LossReport,
    TrainConfig,
    compute_returns,
    episode_gradient,
    episode_loss,
    episode_update,
    run_episode,
    train,
)
from dprl.utils.exceptions import ContractViolation, TrainingAborted
from dprl.utils.functions import cell_streams, least_squares_slope

FD_STEP = 1e-5


def small_policy(seed=0, hidden=6):
    return policy_init(hidden, np.random.default_rng(seed))


def sampled_record(kind, seed=0, env=EnvKind.DRIFT, policy=None):
    rng = np.random.default_rng(seed)
    signal = generate(env, EnvConfig(), rng)
    return run_episode(policy or small_policy(), signal, TrainConfig(), rng, kind=kind)


def assert_same_params(first, second):
    for a, b in zip(first.arrays(), second.arrays()):
        np.testing.assert_array_equal(a, b)


def default_cell(env, agent, seed=0):
    """Train and evaluate one cell the way `compare` does with the default config."""
    init_rng, train_rng, eval_rng = cell_streams(seed, env.code)
    result = train(env, agent, TrainConfig(seed=seed), train_rng, init_rng=init_rng)
    return aggregate(collect_rollouts(result.params, env, EnvConfig(), n=40, rng=eval_rng))


class TrainConfigTests(SimpleTestCase):
    def test_defaults(self):
        cfg = TrainConfig()
        self.assertEqual((cfg.episodes, cfg.gamma, cfg.lam, cfg.hidden), (800, 0.99, 2.0, 32))

    def test_lambda_reported_under_its_config_name(self):
        data = TrainConfig(lam=0.5).to_dict()
        self.assertEqual(data["lambda"], 0.5)
        self.assertNotIn("lam", data)

    def test_rejects_gamma_above_one(self):
        with self.assertRaises(ContractViolation) as ctx:
            TrainConfig(gamma=1.5)
        self.assertEqual(ctx.exception.field, "gamma")

    def test_rejects_negative_lambda(self):
        with self.assertRaises(ContractViolation):
            TrainConfig(lam=-1.0)


class ComputeReturnsTests(SimpleTestCase):
    def test_undiscounted_suffix_sums(self):
        np.testing.assert_array_equal(compute_returns([0, 0, 1], 1.0), [1.0, 1.0, 1.0])

    def test_two_step_discount(self):
        np.testing.assert_array_equal(compute_returns([1, 1], 0.5), [1.5, 1.0])

    def test_matches_direct_double_sum(self):
        rng = np.random.default_rng(0)
        rewards = rng.choice([-1.0, -0.2, 0.0, 1.0], size=100)
        expected = [sum(0.99 ** (k - t) * rewards[k] for k in range(t, 100)) for t in range(100)]
        np.testing.assert_allclose(compute_returns(rewards, 0.99), expected, rtol=0, atol=1e-12)

    def test_rejects_empty_rewards(self):
        with self.assertRaises(ContractViolation):
            compute_returns([], 0.99)


class RunEpisodeTests(SimpleTestCase):
    def test_silent_policy_never_acts(self):
        policy = small_policy().zeros_like()
        policy = policy.replace(policy.w1, policy.b1, policy.w2, -50.0)
        for env in EnvKind:
            rng = np.random.default_rng(1)
            signal = generate(env, EnvConfig(), rng)
            record = run_episode(policy, signal, TrainConfig(), rng)
            np.testing.assert_array_equal(record.actions, 0)
            np.testing.assert_array_equal(record.rewards, 0.0)

    def test_same_seed_same_record(self):
        first = sampled_record(AgentKind.REINFORCE, seed=3)
        second = sampled_record(AgentKind.REINFORCE, seed=3)
        np.testing.assert_array_equal(first.s, second.s)
        np.testing.assert_array_equal(first.actions, second.actions)
        np.testing.assert_array_equal(first.rewards, second.rewards)
        np.testing.assert_array_equal(first.p, second.p)

    def test_dprl_record_carries_esd_targets(self):
        record = sampled_record(AgentKind.DPRL, seed=4)
        np.testing.assert_array_equal(record.z, esd_trajectory(record.s, EsdParams()))
        self.assertIsNone(sampled_record(AgentKind.REINFORCE, seed=4).z)

    def test_both_agents_sample_identical_actions(self):
        reinforce = sampled_record(AgentKind.REINFORCE, seed=5)
        dprl = sampled_record(AgentKind.DPRL, seed=5)
        np.testing.assert_array_equal(reinforce.actions, dprl.actions)


class EpisodeUpdateTests(SimpleTestCase):
    def test_zero_returns_leave_policy_unchanged(self):
        policy = small_policy()
        signal = EpisodeSignal(EnvKind.DRIFT, np.linspace(0.2, 0.8, 100), {"t_onset": 40})
        record = EpisodeRecord(
            signal=signal,
            s=signal.s,
            actions=np.ones(100, dtype=np.int64),
            rewards=np.zeros(100),
            p=np.full(100, 0.5),
        )
        updated, state, report = episode_update(policy, record, AgentKind.REINFORCE, TrainConfig(), adam_init(policy))
        assert_same_params(policy, updated)
        self.assertEqual(state.step, 1)
        self.assertEqual(report.rl_loss, 0.0)

    def test_lambda_zero_matches_reinforce(self):
        policy = small_policy()
        record = sampled_record(AgentKind.DPRL, seed=6, policy=policy)
        cfg = TrainConfig(lam=0.0)
        reinforce, _, _ = episode_update(policy, record, AgentKind.REINFORCE, cfg, adam_init(policy))
        dprl, _, report = episode_update(policy, record, AgentKind.DPRL, cfg, adam_init(policy))
        assert_same_params(reinforce, dprl)
        self.assertIsNotNone(report.esd_loss)

    def test_dprl_without_targets_is_rejected(self):
        record = sampled_record(AgentKind.REINFORCE, seed=7)
        policy = small_policy()
        with self.assertRaises(ContractViolation):
            episode_update(policy, record, AgentKind.DPRL, TrainConfig(), adam_init(policy))

    def test_update_report_matches_episode_loss(self):
        for kind in AgentKind:
            for cfg in (TrainConfig(), TrainConfig(normalize_returns=True)):
                policy = small_policy(seed=2)
                record = sampled_record(kind, seed=7, policy=policy)
                _, report = episode_gradient(policy, record, kind, cfg)
                self.assertEqual(report, episode_loss(policy, record, kind, cfg))
                self.assertEqual(report.esd_loss is None, kind is AgentKind.REINFORCE)

    def test_gradient_matches_finite_differences_of_the_combined_loss(self):
        for normalize, env in ((False, EnvKind.DRIFT), (True, EnvKind.WINDOW)):
            cfg = TrainConfig(lam=2.0, normalize_returns=normalize)
            policy = small_policy(seed=8, hidden=4)
            record = sampled_record(AgentKind.DPRL, seed=8, env=env, policy=policy)
            grads, _ = episode_gradient(policy, record, AgentKind.DPRL, cfg)

            def total(candidate):
                report = episode_loss(candidate, record, AgentKind.DPRL, cfg)
                return report.rl_loss + cfg.lam * report.esd_loss

            numeric = []
            for index, array in enumerate(policy.arrays()):
                array = np.array(array, dtype=np.float64)
                grad = np.zeros_like(array)
                for position in np.ndindex(array.shape):
                    values = []
                    for sign in (1.0, -1.0):
                        bumped = array.copy()
                        bumped[position] += sign * FD_STEP
                        arrays = list(policy.arrays())
                        arrays[index] = bumped
                        values.append(total(policy.replace(*arrays)))
                    grad[position] = (values[0] - values[1]) / (2.0 * FD_STEP)
                numeric.append(np.ravel(grad))
            numeric = np.concatenate(numeric)
            analytic = np.concatenate([np.ravel(a) for a in grads.arrays()])
            self.assertLess(np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric), 1e-4)


class TrainTests(SimpleTestCase):
    def test_zero_episodes_returns_initial_policy(self):
        cfg = TrainConfig(episodes=0, hidden=8)
        result = train(EnvKind.DRIFT, AgentKind.DPRL, cfg, np.random.default_rng(0))
        assert_same_params(result.params, policy_init(8, np.random.default_rng(0)))
        self.assertEqual(result.total_reward, [])

    def test_same_inputs_bit_identical(self):
        cfg = TrainConfig(episodes=15, hidden=8)
        first = train(EnvKind.HOVER, AgentKind.DPRL, cfg, np.random.default_rng(2), init_rng=np.random.default_rng(1))
        second = train(EnvKind.HOVER, AgentKind.DPRL, cfg, np.random.default_rng(2), init_rng=np.random.default_rng(1))
        assert_same_params(first.params, second.params)
        self.assertEqual(first.rl_loss, second.rl_loss)

    def test_lambda_zero_dprl_equals_reinforce(self):
        cfg = TrainConfig(episodes=20, hidden=8, lam=0.0)
        for env in EnvKind:
            reinforce = train(env, AgentKind.REINFORCE, cfg, np.random.default_rng(9), init_rng=np.random.default_rng(3))
            dprl = train(env, AgentKind.DPRL, cfg, np.random.default_rng(9), init_rng=np.random.default_rng(3))
            assert_same_params(reinforce.params, dprl.params)
            self.assertEqual(reinforce.total_reward, dprl.total_reward)

    def test_curves_have_one_row_per_episode(self):
        cfg = TrainConfig(episodes=5, hidden=4)
        result = train(EnvKind.WINDOW, AgentKind.REINFORCE, cfg, np.random.default_rng(0))
        rows = list(result.curve_rows())
        self.assertEqual([row[0] for row in rows], [0, 1, 2, 3, 4])
        self.assertTrue(all(row[3] is None for row in rows))

    def test_non_finite_loss_aborts_with_episode_index(self):
        cfg = TrainConfig(episodes=10, hidden=4, seed=3)
        calls = {"n": 0}

        def update(policy, record, kind, cfg, opt_state):
            calls["n"] += 1
            loss = float("nan") if calls["n"] == 4 else 0.0
            return policy, opt_state, LossReport(rl_loss=loss, esd_loss=0.0)

        with mock.patch("dprl.training.trainer.episode_update", side_effect=update):
            with self.assertLogs("dprl.training.trainer", level="ERROR"):
                with self.assertRaises(TrainingAborted) as ctx:
                    train(EnvKind.DRIFT, AgentKind.DPRL, cfg, np.random.default_rng(0))
        self.assertEqual(ctx.exception.episode, 3)
        self.assertEqual(ctx.exception.seed, 3)
        self.assertIn("episode 3", str(ctx.exception))

    def test_policy_params_type_survives_training(self):
        result = train(EnvKind.DRIFT, AgentKind.REINFORCE, TrainConfig(episodes=3, hidden=4), np.random.default_rng(0))
        self.assertIsInstance(result.params, PolicyParams)
        self.assertTrue(result.params.is_finite())


class DefaultCellTests(SimpleTestCase):
    """Reduced directional checks on single default-config cells."""

    def test_window_dprl_builds_confidence_where_reinforce_stays_inert(self):
        reinforce = default_cell(EnvKind.WINDOW, AgentKind.REINFORCE)
        dprl = default_cell(EnvKind.WINDOW, AgentKind.DPRL)
        self.assertGreater(least_squares_slope(dprl.mean_curve), 0.0)
        self.assertGreater(dprl.n_committed, reinforce.n_committed)
        self.assertGreater(dprl.mean_jerk, reinforce.mean_jerk)

    def test_drift_dprl_tracks_the_ramp_where_reinforce_commits_at_once(self):
        # Seed 0 is one of the drift seeds where REINFORCE settles on acting from t = 1.
        reinforce = default_cell(EnvKind.DRIFT, AgentKind.REINFORCE)
        dprl = default_cell(EnvKind.DRIFT, AgentKind.DPRL)
        self.assertEqual(dprl.n_committed, 40)
        self.assertGreater(dprl.mean_decision_time, reinforce.mean_decision_time)
        self.assertGreater(dprl.timing_variance, reinforce.timing_variance)
        self.assertGreater(dprl.mean_jerk, reinforce.mean_jerk)
