import numpy as np
from django.test import SimpleTestCase

from dprl.environments.envs import EnvConfig, EnvKind
from dprl.evaluation.metrics import RolloutTrace, aggregate, decision_time, jerk, oscillation_count
from dprl.evaluation.rollouts import collect_rollouts
from dprl.policy.network import policy_init
from dprl.utils.exceptions import ContractViolation


def scan_jerk(p):
    largest = 0.0
    for t in range(1, len(p)):
        largest = max(largest, abs(p[t] - p[t - 1]))
    return largest


def scan_crossings(p):
    count = 0
    for t in range(1, len(p)):
        if (p[t - 1] > 0.5) != (p[t] > 0.5):
            count += 1
    return count


def scan_decision_time(p, threshold=0.6):
    for t in range(len(p)):
        if p[t] > threshold:
            return t + 1
    return None


class JerkTests(SimpleTestCase):
    def test_constant_trace(self):
        self.assertEqual(jerk(RolloutTrace(np.full(100, 0.42))), 0.0)

    def test_largest_step(self):
        self.assertAlmostEqual(jerk(RolloutTrace([0.1, 0.5, 0.6])), 0.4, delta=1e-12)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            p = rng.random(int(rng.integers(2, 60)))
            self.assertEqual(jerk(RolloutTrace(p)), scan_jerk(p))

    def test_rejects_single_step_trace(self):
        with self.assertRaises(ContractViolation):
            jerk(RolloutTrace([0.5]))


class OscillationTests(SimpleTestCase):
    def test_two_flips(self):
        self.assertEqual(oscillation_count(RolloutTrace([0.4, 0.6, 0.4])), 2)

    def test_monotone_below_boundary(self):
        self.assertEqual(oscillation_count(RolloutTrace(np.linspace(0.0, 0.49, 50))), 0)

    def test_exact_boundary_is_lower_side(self):
        self.assertEqual(oscillation_count(RolloutTrace([0.4, 0.5, 0.4])), 0)
        self.assertEqual(oscillation_count(RolloutTrace([0.5, 0.6])), 1)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            p = rng.random(int(rng.integers(2, 60)))
            self.assertEqual(oscillation_count(RolloutTrace(p)), scan_crossings(p))

    def test_rejects_single_step_trace(self):
        with self.assertRaises(ContractViolation):
            oscillation_count(RolloutTrace([0.7]))


class DecisionTimeTests(SimpleTestCase):
    def test_first_exceedance_is_one_indexed(self):
        self.assertEqual(decision_time(RolloutTrace([0.5, 0.7, 0.9])), 2)

    def test_never_exceeds(self):
        self.assertIsNone(decision_time(RolloutTrace(np.full(100, 0.55))))

    def test_threshold_is_strict(self):
        self.assertIsNone(decision_time(RolloutTrace([0.6, 0.6, 0.6])))

    def test_raising_threshold_never_decides_earlier(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            trace = RolloutTrace(rng.random(30))
            low = decision_time(trace, 0.6)
            high = decision_time(trace, 0.8)
            if high is not None:
                self.assertLessEqual(low, high)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(4)
        undecided = 0
        for index in range(1000):
            p = rng.random(int(rng.integers(2, 60)))
            if index % 3 == 0:
                p = 0.6 * p
            expected = scan_decision_time(p)
            undecided += expected is None
            self.assertEqual(decision_time(RolloutTrace(p)), expected)
            self.assertEqual(decision_time(RolloutTrace(p), 0.9), scan_decision_time(p, 0.9))
        self.assertGreater(undecided, 300)


class AggregateTests(SimpleTestCase):
    def test_identical_traces(self):
        p = np.linspace(0.3, 0.9, 100)
        summary = aggregate([RolloutTrace(p) for _ in range(5)])
        np.testing.assert_array_equal(summary.std_curve, 0.0)
        self.assertEqual(summary.timing_variance, 0.0)
        self.assertEqual(summary.n_committed, 5)
        self.assertFalse(summary.non_committal)

    def test_never_committing_set(self):
        summary = aggregate([RolloutTrace(np.full(100, 0.3)) for _ in range(40)])
        self.assertEqual(summary.n_committed, 0)
        self.assertEqual(summary.timing_variance, 0.0)
        self.assertTrue(summary.non_committal)
        self.assertIsNone(summary.mean_decision_time)

    def test_population_variance_of_decision_times(self):
        first = np.full(20, 0.1)
        first[9:] = 0.9
        second = np.full(20, 0.1)
        second[13:] = 0.9
        summary = aggregate([RolloutTrace(first), RolloutTrace(second)])
        self.assertEqual(summary.timing_variance, 4.0)
        self.assertEqual(summary.timing_std, 2.0)
        self.assertEqual(summary.mean_decision_time, 12.0)

    def test_single_trace_reproduces_per_trace_metrics(self):
        p = np.random.default_rng(3).random(50)
        summary = aggregate([RolloutTrace(p)])
        self.assertEqual(summary.mean_jerk, jerk(RolloutTrace(p)))
        self.assertEqual(summary.mean_oscillations, oscillation_count(RolloutTrace(p)))
        np.testing.assert_array_equal(summary.mean_curve, p)

    def test_means_over_traces(self):
        traces = [RolloutTrace([0.4, 0.6, 0.4]), RolloutTrace([0.1, 0.2, 0.3])]
        summary = aggregate(traces)
        self.assertAlmostEqual(summary.mean_oscillations, 1.0)
        self.assertAlmostEqual(summary.mean_jerk, 0.15, delta=1e-12)
        payload = summary.to_dict(curves=False)
        self.assertNotIn("mean_curve", payload)
        self.assertEqual(payload["n_rollouts"], 2)

    def test_rejects_empty_input(self):
        with self.assertRaises(ContractViolation):
            aggregate([])


class CollectRolloutsTests(SimpleTestCase):
    def test_shape(self):
        policy = policy_init(8, np.random.default_rng(0))
        traces = collect_rollouts(policy, EnvKind.DRIFT, EnvConfig(), n=40, rng=np.random.default_rng(1))
        self.assertEqual(len(traces), 40)
        self.assertTrue(all(trace.p.shape == (100,) for trace in traces))
        self.assertTrue(all("t_onset" in trace.landmarks for trace in traces))

    def test_constant_policy(self):
        policy = policy_init(8, np.random.default_rng(0)).zeros_like()
        for trace in collect_rollouts(policy, EnvKind.HOVER, n=5, rng=np.random.default_rng(1)):
            np.testing.assert_array_equal(trace.p, 0.5)

    def test_same_seed_same_traces(self):
        policy = policy_init(8, np.random.default_rng(0))
        first = collect_rollouts(policy, EnvKind.WINDOW, n=10, rng=np.random.default_rng(5))
        second = collect_rollouts(policy, EnvKind.WINDOW, n=10, rng=np.random.default_rng(5))
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.p, b.p)

    def test_does_not_touch_the_policy(self):
        policy = policy_init(8, np.random.default_rng(0))
        before = [np.copy(array) for array in policy.arrays()]
        collect_rollouts(policy, EnvKind.DRIFT, n=3, rng=np.random.default_rng(5))
        for a, b in zip(before, policy.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_requires_a_stream(self):
        policy = policy_init(8, np.random.default_rng(0))
        with self.assertRaises(ContractViolation):
            collect_rollouts(policy, EnvKind.DRIFT, n=3)
