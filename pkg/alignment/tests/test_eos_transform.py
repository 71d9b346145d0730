from django.test import SimpleTestCase, override_settings
import numpy as np
from numpy.testing import assert_allclose

from alignment.eos_transform import (EosParams, alignment_weight_values, check_density, inverse_form_discrepancy,
                                     pressure_values, rho_from_sigma, rho_from_sigma_values, sigma_from_rho,
                                     sigma_from_rho_values, sound_speed_from_sigma, sound_speed_values)
from alignment.exceptions import AdmissibilityError, EosError
from alignment.grid_field import ScalarField, make_grid


class EosParamsTestCase(SimpleTestCase):

    def test_derived_constants(self):
        eos = EosParams(A=1., gamma=2., rho_bar=0.5, a=2., tau=0.4)
        self.assertAlmostEqual(eos.nu, 2.)
        self.assertAlmostEqual(eos.kappa_bar, 1.)
        self.assertAlmostEqual(eos.a_sym, 1.)
        self.assertAlmostEqual(eos.damping_rate, 2.5)
        self.assertAlmostEqual(eos.background_weight, 1.)

    def test_symmetrized_alignment_constructor(self):
        for A, gamma in [(1., 2.), (2., 1.5), (0.5, 3.)]:
            eos = EosParams.with_symmetrized_alignment(0.7, A=A, gamma=gamma, rho_bar=1.3, tau=2.)
            self.assertAlmostEqual(eos.a_sym, 0.7)

    def test_invalid_constants(self):
        for changes in [{'gamma': 1.}, {'rho_bar': 0.}, {'tau': 0.}, {'a': -1.}, {'A': 0.}]:
            kwargs = dict(A=1., gamma=2., rho_bar=1., a=1., tau=1.)
            kwargs.update(changes)
            with self.assertRaises(EosError):
                EosParams(**kwargs)

    def test_infinite_tau_switches_damping_off(self):
        self.assertEqual(EosParams(A=1., gamma=2., rho_bar=1., a=0., tau=np.inf).damping_rate, 0.)


class TransformTestCase(SimpleTestCase):

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        for gamma in (1.5, 2., 3.):
            eos = EosParams(A=1., gamma=gamma, rho_bar=0.8, a=1., tau=1.)
            rho = rng.uniform(0.5 * eos.rho_bar, 2. * eos.rho_bar, size=(1000, 64))
            back = rho_from_sigma_values(sigma_from_rho_values(rho, eos), eos)
            self.assertLessEqual(np.max(np.abs(back - rho)) / np.max(np.abs(rho)), 1e-12)

    def test_background_maps_to_zero(self):
        eos = EosParams(A=1.7, gamma=1.4, rho_bar=0.3, a=1., tau=1.)
        self.assertAlmostEqual(float(sigma_from_rho_values(np.array([0.3]), eos)[0]), 0., places=14)

    def test_field_level_functions(self):
        grid = make_grid(1, 2. * np.pi, 16)
        eos = EosParams(A=1., gamma=2., rho_bar=0.5, a=1., tau=1.)
        sigma = ScalarField(grid, 0.1 * np.sin(grid.coordinates[0]))
        rho = rho_from_sigma(sigma, eos)
        assert_allclose(sigma_from_rho(rho, eos).values, sigma.values, atol=1e-14)
        assert_allclose(sound_speed_from_sigma(sigma, eos).values, sound_speed_values(rho.values, eos), rtol=1e-13)

    def test_pressure_and_sound_speed(self):
        eos = EosParams(A=1., gamma=2., rho_bar=0.5, a=1., tau=1.)
        self.assertAlmostEqual(float(pressure_values(np.array([0.5]), eos)[0]), 0.25)
        self.assertAlmostEqual(float(sound_speed_values(np.array([0.5]), eos)[0]), 1.)

    def test_alignment_weight_reproduces_density(self):
        eos = EosParams(A=1., gamma=3., rho_bar=1., a=1.5, tau=1.)
        sigma = np.linspace(-0.5, 0.5, 11)
        rho = rho_from_sigma_values(sigma, eos)
        assert_allclose(eos.a_sym * alignment_weight_values(sigma, eos), eos.a * rho, rtol=1e-13)

    def test_inverse_forms_agree_at_unit_pressure_constant(self):
        grid = make_grid(1, 1., 32)
        sigma = ScalarField(grid, 0.3 * np.cos(2. * np.pi * grid.coordinates[0]))
        eos = EosParams(A=1., gamma=1.4, rho_bar=1., a=1., tau=1.)
        self.assertLess(inverse_form_discrepancy(sigma, eos), 1e-13)
        with self.assertRaises(EosError):
            inverse_form_discrepancy(sigma, eos.replace(A=2.))

    def test_sigma_is_strictly_increasing_in_rho(self):
        for gamma in (1.4, 2., 3.):
            eos = EosParams(A=1., gamma=gamma, rho_bar=0.5, a=1., tau=1.)
            sigma = sigma_from_rho_values(np.linspace(0.01, 5., 2001), eos)
            self.assertGreater(np.min(np.diff(sigma)), 0.)

    def test_slope_at_the_background_density(self):
        for gamma in (1.4, 2., 3.):
            eos = EosParams(A=1.3, gamma=gamma, rho_bar=0.7, a=1., tau=1.)
            h = 1e-5
            ends = sigma_from_rho_values(np.array([eos.rho_bar - h, eos.rho_bar + h]), eos)
            slope = (ends[1] - ends[0]) / (2. * h)
            self.assertAlmostEqual(slope / (eos.kappa_bar / eos.rho_bar), 1., delta=1e-6)

    def test_uniform_density_of_two(self):
        grid = make_grid(1, 2. * np.pi, 16)
        eos = EosParams(A=1., gamma=2., rho_bar=0.5, a=1., tau=1.)
        sigma = sigma_from_rho(ScalarField(grid, np.full(16, 2.)), eos)
        assert_allclose(sigma.values, 2., rtol=1e-14)
        assert_allclose(rho_from_sigma(sigma, eos).values, 2., rtol=1e-14)
        assert_allclose(pressure_values(np.full(16, 2.), eos), 4., rtol=1e-14)


class VacuumTestCase(SimpleTestCase):

    def test_sigma_below_vacuum_is_rejected(self):
        eos = EosParams(A=1., gamma=2., rho_bar=0.5, a=1., tau=1.)
        with self.assertRaises(AdmissibilityError) as context:
            rho_from_sigma_values(np.array([0., -2.5]), eos)
        self.assertEqual(context.exception.quantity, 'sigma/nu + kappa_bar')

    @override_settings(ALIGNMENT={'VACUUM_FLOOR': 0.1})
    def test_floor_is_configurable(self):
        with self.assertRaises(AdmissibilityError):
            check_density(np.array([0.05, 1.]))
        check_density(np.array([0.2, 1.]))
