from dataclasses import replace
from unittest import mock

from django.test import SimpleTestCase
import numpy as np

from alignment.exceptions import ConfigError, DiagnosticsError
from alignment.picard import (ContractionReport, IterateTrajectory, PicardConfig, contraction_report, l2_distance,
                              linear_energy_terms, nonlinear_reference, picard_iterate, picard_run, picard_zeroth,
                              tune_horizon)
from alignment.state import Formulation, SimState

from .helpers import reference_setup, single_mode_state


class PicardConfigTestCase(SimpleTestCase):

    def test_steps(self):
        cfg = PicardConfig(T0=0.5, dt=0.01, K=8)
        self.assertEqual(cfg.steps, 50)
        self.assertAlmostEqual(cfg.with_steps(10).T0, 0.1)

    def test_step_must_divide_horizon(self):
        with self.assertRaises(ConfigError):
            PicardConfig(T0=0.5, dt=0.3)

    def test_all_errors_reported(self):
        with self.assertRaises(ConfigError) as context:
            PicardConfig(T0=-1., dt=0., K=1, M_bound=-1., target_ratio=2.)
        self.assertEqual(len(context.exception.errors), 5)

    def test_coefficient_source(self):
        self.assertEqual(PicardConfig().coefficients, 'interpolated')
        with self.assertRaises(ConfigError) as context:
            PicardConfig(coefficients='midpoint')
        self.assertIn('coefficients', context.exception.errors[0])


class PicardIterationTestCase(SimpleTestCase):
    """damping-dominated reference configuration, sigma0 = 0.01 sin x, u0 = -0.01 cos x"""

    def setUp(self):
        self.grid, self.eos, self.kernel = reference_setup(points=64)
        self.init = single_mode_state(self.grid, 1e-2)
        self.cfg = PicardConfig(T0=0.5, dt=0.01, K=8)

    def test_zeroth_iterate_is_the_initial_data(self):
        zeroth = picard_zeroth(self.init, self.cfg)
        self.assertEqual(len(zeroth.states), 51)
        self.assertAlmostEqual(zeroth.times[-1], 0.5)
        for state in zeroth.states:
            np.testing.assert_array_equal(state.density_like.values, self.init.density_like.values)

    def test_contraction_and_limit(self):
        iterates, report = picard_run(self.init, self.eos, self.kernel, self.cfg)
        self.assertEqual(len(iterates), 9)
        self.assertEqual(len(report.differences), 8)
        self.assertTrue(report.contracting)
        self.assertFalse(report.bound_exceeded)
        self.assertLessEqual(report.max_ratio(), 0.5)
        reference = nonlinear_reference(self.init, self.eos, self.kernel, self.cfg)
        # interpolating the coefficients between slices leaves an O(dt^2) gap to the nonlinear solution
        distance = l2_distance(iterates[-1].states, reference)
        self.assertLessEqual(distance, 10. * report.differences[-1] + 1e-6)

    def test_stage_coefficients_converge_to_the_nonlinear_steps(self):
        cfg = replace(self.cfg, coefficients='stages')
        iterates, report = picard_run(self.init, self.eos, self.kernel, cfg)
        self.assertTrue(report.contracting)
        self.assertLessEqual(report.max_ratio(), 0.5)
        reference = nonlinear_reference(self.init, self.eos, self.kernel, cfg)
        distance = l2_distance(iterates[-1].states, reference)
        self.assertLessEqual(distance, max(10. * report.differences[-1], report.floor))

    def test_both_coefficient_sources_share_the_first_iterate(self):
        # the zeroth iterate carries no stage states
        first = picard_iterate(picard_zeroth(self.init, self.cfg), self.init, self.eos, self.kernel, self.cfg)
        staged = picard_iterate(picard_zeroth(self.init, self.cfg), self.init, self.eos, self.kernel,
                                replace(self.cfg, coefficients='stages'))
        self.assertEqual(l2_distance(first.states, staged.states), 0.)
        self.assertEqual(len(first.stages), 50)
        self.assertEqual(len(first.stages[0]), 3)

    def test_energy_identity_of_an_iterate(self):
        iterates, report = picard_run(self.init, self.eos, self.kernel, PicardConfig(T0=0.01, dt=1e-4, K=3))
        balance = linear_energy_terms(iterates[2], iterates[1], self.eos, self.kernel)
        self.assertLessEqual(balance.relative_residual, 1e-6)
        self.assertEqual(len(balance.lhs), 101)
        np.testing.assert_allclose(balance.lhs, balance.rate + balance.damping)
        # damping dominates the decay of the energy
        self.assertTrue(np.all(balance.rate < 0.))

    def test_energy_identity_fails_for_states_frozen_in_time(self):
        iterates, report = picard_run(self.init, self.eos, self.kernel, PicardConfig(T0=0.01, dt=1e-4, K=3))
        start = iterates[2].states[0]
        frozen = IterateTrajectory(states=[SimState(Formulation.SYMMETRIZED, start.density_like, start.velocity, t)
                                           for t in iterates[2].times], iterate_index=2)
        balance = linear_energy_terms(frozen, iterates[1], self.eos, self.kernel)
        np.testing.assert_array_equal(balance.rate, np.zeros(101))
        self.assertGreater(balance.relative_residual, 0.5)

    def test_energy_identity_needs_three_slices(self):
        iterates, report = picard_run(self.init, self.eos, self.kernel, PicardConfig(T0=0.01, dt=0.01, K=2))
        with self.assertRaises(DiagnosticsError):
            linear_energy_terms(iterates[2], iterates[1], self.eos, self.kernel)

    def test_bound_monitor(self):
        with self.assertLogs('alignment.picard', 'WARNING'):
            iterates, report = picard_run(self.init, self.eos, self.kernel,
                                          PicardConfig(T0=0.1, dt=0.01, K=2, M_bound=1e-6))
        self.assertTrue(report.bound_exceeded)
        self.assertTrue(iterates[-1].bound_exceeded)

    def test_primitive_data_is_rejected(self):
        with self.assertRaises(ConfigError):
            picard_zeroth(single_mode_state(self.grid, 1e-2, self.eos, primitive=True), self.cfg)


class ContractionReportTestCase(SimpleTestCase):

    def test_growing_differences_are_flagged(self):
        grid, eos, kernel = reference_setup(points=16)
        x = grid.coordinates[0]
        iterates = []
        for index, scale in enumerate([0., 1., 3., 9., 27.]):
            states = [SimState.from_arrays(Formulation.SYMMETRIZED, grid, scale * np.sin(x), np.zeros((1, 16)), t)
                      for t in (0., 0.1)]
            iterates.append(IterateTrajectory(states=states, iterate_index=index))
        with self.assertLogs('alignment.picard', 'WARNING'):
            report = contraction_report(iterates)
        np.testing.assert_allclose(report.ratios, [2., 3., 3.])
        self.assertFalse(report.contracting)
        self.assertEqual(report.non_contraction_at, 1)
        np.testing.assert_allclose(report.partial_sums, np.sqrt(np.pi) * np.array([1., 3., 9., 27.]))

    def test_horizon_is_halved_until_ratios_are_small(self):

        def fake_run(init, eos, kernel, trial):
            return [], ContractionReport(ratios=[0.9, 0.9, 0.9 if trial.steps > 2 else 0.1])

        grid, eos, kernel = reference_setup(points=16)
        with mock.patch('alignment.picard.picard_run', side_effect=fake_run) as run:
            tuned, iterates, report = tune_horizon(single_mode_state(grid, 1e-2), eos, kernel,
                                                   PicardConfig(T0=0.08, dt=0.01))
        self.assertEqual(run.call_count, 3)
        self.assertEqual(tuned.steps, 2)
        self.assertAlmostEqual(tuned.T0, 0.02)
        self.assertEqual(report.max_ratio(), 0.1)
