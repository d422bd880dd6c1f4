import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from dprl.policy.checkpoints import load_checkpoint, params_to_dict, save_checkpoint
from dprl.policy.network import PolicyParams, forward, grad_logprob, grad_mse, log_prob, policy_init
from dprl.policy.optim import adam_init, adam_step
from dprl.utils.exceptions import ContractViolation

FD_STEP = 1e-5
REL_TOL = 1e-4


def random_params(rng, hidden=8, activation="tanh"):
    return PolicyParams(
        w1=rng.normal(0.0, 1.0, (hidden, 1)),
        b1=rng.normal(0.0, 0.5, hidden),
        w2=rng.normal(0.0, 1.0, (1, hidden)),
        b2=float(rng.normal(0.0, 0.5)),
        activation=activation,
    )


def finite_difference(fn, params):
    """Central differences of the scalar fn(params) w.r.t. every parameter entry."""
    grads = []
    for index, array in enumerate(params.arrays()):
        array = np.array(array, dtype=np.float64)
        grad = np.zeros_like(array)
        for position in np.ndindex(array.shape):
            shifted = []
            for sign in (1.0, -1.0):
                bumped = array.copy()
                bumped[position] += sign * FD_STEP
                arrays = list(params.arrays())
                arrays[index] = bumped
                shifted.append(fn(params.replace(*arrays)))
            grad[position] = (shifted[0] - shifted[1]) / (2.0 * FD_STEP)
        grads.append(grad)
    return grads


def assert_grads_close(testcase, analytic, numeric):
    analytic = np.concatenate([np.ravel(a) for a in analytic.arrays()])
    numeric = np.concatenate([np.ravel(n) for n in numeric])
    scale = max(np.linalg.norm(numeric), 1e-8)
    testcase.assertLess(np.linalg.norm(analytic - numeric) / scale, REL_TOL)


def manual_probability(params, s):
    h = np.tanh(params.w1[:, 0] * s + params.b1)
    logit = float(np.dot(params.w2[0], h) + params.b2)
    return 1.0 / (1.0 + np.exp(-logit))


class PolicyInitTests(SimpleTestCase):
    def test_weight_ranges_and_zero_biases(self):
        params = policy_init(32, np.random.default_rng(0))
        self.assertEqual(params.w1.shape, (32, 1))
        self.assertTrue(np.all(np.abs(params.w1) <= 1.0))
        self.assertTrue(np.all(np.abs(params.w2) <= 1.0 / np.sqrt(32)))
        np.testing.assert_array_equal(params.b1, 0.0)
        self.assertEqual(params.b2, 0.0)

    def test_same_seed_same_parameters(self):
        first = policy_init(32, np.random.default_rng(5))
        second = policy_init(32, np.random.default_rng(5))
        for a, b in zip(first.arrays(), second.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_single_hidden_unit(self):
        params = policy_init(1, np.random.default_rng(0))
        self.assertEqual(sum(np.size(array) for array in params.arrays()), 4)
        p, _ = forward(params, 0.5)
        self.assertTrue(0.0 < p < 1.0)

    def test_rejects_zero_hidden(self):
        with self.assertRaises(ContractViolation):
            policy_init(0, np.random.default_rng(0))


class ForwardTests(SimpleTestCase):
    def test_zero_parameters_give_one_half(self):
        params = policy_init(4, np.random.default_rng(0)).zeros_like()
        for s in (0.0, 0.3, 1.0):
            p, _ = forward(params, s)
            self.assertEqual(p, 0.5)

    def test_saturated_bias(self):
        params = policy_init(4, np.random.default_rng(0)).zeros_like()
        params = params.replace(params.w1, params.b1, params.w2, 20.0)
        p, _ = forward(params, 0.5)
        self.assertGreater(p, 0.9999)
        self.assertLess(p, 1.0)

    def test_probability_stays_open_interval_when_saturated(self):
        params = policy_init(4, np.random.default_rng(0)).zeros_like()
        for bias in (-800.0, 800.0):
            p, cache = forward(params.replace(params.w1, params.b1, params.w2, bias), np.linspace(0, 1, 5))
            self.assertTrue(np.all((p > 0.0) & (p < 1.0)))
            self.assertTrue(np.all(np.isfinite(log_prob(cache, np.ones(5)))))

    def test_matches_independent_implementation(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            params = random_params(rng, hidden=32)
            p, _ = forward(params, 0.5)
            self.assertAlmostEqual(p, manual_probability(params, 0.5), delta=1e-12)

    def test_batch_matches_scalar_calls(self):
        params = random_params(np.random.default_rng(3))
        s = np.linspace(0.0, 1.0, 17)
        batch, _ = forward(params, s)
        np.testing.assert_allclose(batch, [forward(params, x)[0] for x in s], rtol=0, atol=1e-15)


class GradLogprobTests(SimpleTestCase):
    def test_logit_gradient_at_one_half(self):
        params = policy_init(3, np.random.default_rng(0)).zeros_like()
        _, cache = forward(params, 0.4)
        self.assertAlmostEqual(grad_logprob(params, 0.4, 1, cache).b2, 0.5)
        self.assertAlmostEqual(grad_logprob(params, 0.4, 0, cache).b2, -0.5)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(21)
        for trial in range(100):
            activation = "relu" if trial % 4 == 3 else "tanh"
            params = random_params(rng, hidden=6, activation=activation)
            s = float(rng.random())
            a = int(rng.integers(0, 2))
            _, cache = forward(params, s)
            analytic = grad_logprob(params, s, a, cache)

            def objective(candidate):
                return float(log_prob(forward(candidate, s)[1], a)[0])

            assert_grads_close(self, analytic, finite_difference(objective, params))

    def test_sum_over_actions_is_gradient_of_both_log_terms(self):
        rng = np.random.default_rng(4)
        params = random_params(rng)
        s = 0.7
        _, cache = forward(params, s)
        combined = grad_logprob(params, s, 1, cache) + grad_logprob(params, s, 0, cache)

        def objective(candidate):
            _, c = forward(candidate, s)
            return float(log_prob(c, 1)[0] + log_prob(c, 0)[0])

        assert_grads_close(self, combined, finite_difference(objective, params))

    def test_shapes_follow_parameters(self):
        params = random_params(np.random.default_rng(8), hidden=5)
        s = np.linspace(0, 1, 10)
        _, cache = forward(params, s)
        grads = grad_logprob(params, s, np.ones(10), cache)
        for grad, param in zip(grads.arrays(), params.arrays()):
            self.assertEqual(np.shape(grad), np.shape(param))

    def test_rejects_mismatched_actions(self):
        params = random_params(np.random.default_rng(8))
        _, cache = forward(params, np.zeros(4))
        with self.assertRaises(ContractViolation):
            grad_logprob(params, np.zeros(4), np.ones(3), cache)


class GradMseTests(SimpleTestCase):
    def test_zero_at_target(self):
        params = random_params(np.random.default_rng(1))
        p, cache = forward(params, 0.2)
        grads = grad_mse(params, 0.2, p, cache)
        for grad in grads.arrays():
            np.testing.assert_array_equal(grad, 0.0)

    def test_logit_gradient_plug_in(self):
        params = policy_init(3, np.random.default_rng(0)).zeros_like()
        _, cache = forward(params, 0.9)
        self.assertAlmostEqual(grad_mse(params, 0.9, 0.0, cache).b2, 0.25)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(31)
        for trial in range(100):
            activation = "relu" if trial % 4 == 3 else "tanh"
            params = random_params(rng, hidden=6, activation=activation)
            s = float(rng.random())
            target = float(rng.random())
            _, cache = forward(params, s)
            analytic = grad_mse(params, s, target, cache)

            def objective(candidate):
                return (forward(candidate, s)[0] - target) ** 2

            assert_grads_close(self, analytic, finite_difference(objective, params))

    def test_weighted_batch_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        params = random_params(rng)
        s = rng.random(12)
        target = rng.random(12)
        weights = rng.normal(size=12)
        _, cache = forward(params, s)
        analytic = grad_mse(params, s, target, cache, weights=weights)

        def objective(candidate):
            p, _ = forward(candidate, s)
            return float(np.sum(weights * (p - target) ** 2))

        assert_grads_close(self, analytic, finite_difference(objective, params))


class AdamTests(SimpleTestCase):
    def test_zero_gradient_leaves_parameters(self):
        params = random_params(np.random.default_rng(0))
        updated, state = adam_step(params, params.zeros_like(), adam_init(params))
        self.assertEqual(state.step, 1)
        for before, after in zip(params.arrays(), updated.arrays()):
            np.testing.assert_array_equal(before, after)

    def test_first_step_moves_by_learning_rate_against_gradient(self):
        params = random_params(np.random.default_rng(0))
        grads = params.zeros_like()
        grads = grads.replace(grads.w1, grads.b1, grads.w2, 3.0)
        updated, _ = adam_step(params, grads, adam_init(params), learn_rate=0.01)
        self.assertAlmostEqual(updated.b2, params.b2 - 0.01, delta=1e-9)

    def test_descends_a_quadratic(self):
        rng = np.random.default_rng(2)
        params = random_params(rng)
        state = adam_init(params)
        p0, _ = forward(params, 0.5)
        for _ in range(300):
            p, cache = forward(params, 0.5)
            params, state = adam_step(params, grad_mse(params, 0.5, 0.9, cache), state, learn_rate=0.01)
        p, _ = forward(params, 0.5)
        self.assertLess(abs(p - 0.9), abs(p0 - 0.9))
        self.assertLess(abs(p - 0.9), 0.05)


class CheckpointTests(SimpleTestCase):
    def test_save_and_reload(self):
        params = policy_init(32, np.random.default_rng(6), activation="relu")
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "checkpoint.json")
            save_checkpoint(path, params)
            loaded = load_checkpoint(path)
        self.assertEqual(loaded.activation, "relu")
        self.assertEqual(params_to_dict(loaded), params_to_dict(params))
        p_before, _ = forward(params, 0.42)
        p_after, _ = forward(loaded, 0.42)
        self.assertEqual(p_before, p_after)

    def test_malformed_checkpoint(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.json")
            with open(path, "w") as handle:
                handle.write('{"hidden": 3, "w1": [1, 2]}')
            with self.assertRaises(ContractViolation):
                load_checkpoint(path)
