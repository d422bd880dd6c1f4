import numpy as np
from django.test import SimpleTestCase

from dprl.esd.dynamics import EsdParams, EsdState, esd_init, esd_step, esd_trajectory
from dprl.utils.exceptions import ContractViolation


class EsdParamsTests(SimpleTestCase):
    def test_defaults(self):
        params = EsdParams()
        self.assertEqual((params.alpha_up, params.alpha_down, params.beta), (0.15, 0.4, 0.6))
        self.assertTrue(params.clamp_output)

    def test_rejects_zero_rate(self):
        with self.assertRaises(ContractViolation):
            EsdParams(alpha_up=0.0)

    def test_rejects_beta_above_one(self):
        with self.assertRaises(ContractViolation):
            EsdParams(beta=1.5)


class EsdInitTests(SimpleTestCase):
    def test_starts_at_observation_with_zero_velocity(self):
        for s0 in (0.0, 0.3, 1.0):
            self.assertEqual(esd_init(s0), EsdState(z=s0, v=0.0))

    def test_rejects_out_of_range(self):
        with self.assertRaises(ContractViolation):
            esd_init(1.1)


class EsdStepTests(SimpleTestCase):
    params = EsdParams()

    def test_fixed_point(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            s = float(rng.random())
            params = EsdParams(
                alpha_up=float(rng.uniform(0.01, 1.0)),
                alpha_down=float(rng.uniform(0.01, 1.0)),
                beta=float(rng.random()),
            )
            state = esd_step(EsdState(z=s, v=0.0), s, params)
            self.assertLessEqual(abs(state.z - s), 1e-15)
            self.assertLessEqual(abs(state.v), 1e-15)

    def test_two_step_rise_from_zero(self):
        first = esd_step(EsdState(z=0.0, v=0.0), 1.0, self.params)
        self.assertAlmostEqual(first.z, 0.15, delta=1e-12)
        self.assertAlmostEqual(first.v, 0.09, delta=1e-12)

        second = esd_step(first, 1.0, self.params)
        self.assertAlmostEqual(second.z, 0.3675, delta=1e-12)
        self.assertAlmostEqual(second.v, 0.1665, delta=1e-12)

    def test_one_step_fall_uses_alpha_down(self):
        state = esd_step(EsdState(z=1.0, v=0.0), 0.0, self.params)
        self.assertAlmostEqual(state.z, 0.6, delta=1e-12)

    def test_asymmetry_factor(self):
        gap = 0.2
        up = esd_step(EsdState(z=0.4, v=0.0), 0.4 + gap, self.params)
        down = esd_step(EsdState(z=0.4, v=0.0), 0.4 - gap, self.params)
        self.assertAlmostEqual(up.z - 0.4, 0.15 * gap, delta=1e-12)
        self.assertAlmostEqual(0.4 - down.z, 0.4 * gap, delta=1e-12)
        self.assertAlmostEqual((0.4 - down.z) / (up.z - 0.4), 0.4 / 0.15, delta=1e-9)

    def test_clamp_applies_before_velocity(self):
        state = esd_step(EsdState(z=0.95, v=0.2), 1.0, self.params)
        self.assertEqual(state.z, 1.0)
        self.assertAlmostEqual(state.v, 0.6 * 0.05 + 0.4 * 0.2, delta=1e-12)

    def test_unclamped_can_overshoot(self):
        state = esd_step(EsdState(z=0.95, v=0.2), 1.0, EsdParams(clamp_output=False))
        self.assertGreater(state.z, 1.0)


class EsdTrajectoryTests(SimpleTestCase):
    params = EsdParams()

    def test_constant_signal(self):
        np.testing.assert_array_equal(esd_trajectory(np.full(50, 0.37), self.params), 0.37)

    def test_step_signal_rises_monotonically(self):
        signal = np.concatenate([np.zeros(5), np.ones(20)])
        z = esd_trajectory(signal, self.params)
        np.testing.assert_array_equal(z[:5], 0.0)
        self.assertTrue(np.all(np.diff(z[4:]) >= 0.0))
        self.assertGreater(z[-1], 0.9)

    def test_equals_repeated_steps(self):
        signal = np.random.default_rng(1).random(100)
        state = esd_init(signal[0])
        expected = []
        for s in signal:
            state = esd_step(state, s, self.params)
            expected.append(state.z)
        np.testing.assert_array_equal(esd_trajectory(signal, self.params), expected)

    def test_clamped_output_is_bounded(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            z = esd_trajectory(rng.random(100), self.params)
            self.assertTrue(np.all((z >= 0.0) & (z <= 1.0)))

    def test_rejects_empty_signal(self):
        with self.assertRaises(ContractViolation):
            esd_trajectory([], self.params)
