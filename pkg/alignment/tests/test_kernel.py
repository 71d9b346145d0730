from django.test import SimpleTestCase
import numpy as np
from numpy.testing import assert_allclose

from alignment.exceptions import AdmissibilityError, KernelError
from alignment.grid_field import ScalarField, VectorField, make_grid, spectral_grad
from alignment.kernel import (KernelSpec, YoungMonitor, alignment_force, alignment_force_direct, build_kernel,
                              convolve, convolve_weight, kernel_l1_norm)


def random_vector(grid, seed):
    rng = np.random.default_rng(seed)
    return VectorField(grid, rng.standard_normal((grid.dim,) + grid.shape))


def random_weight(grid, seed):
    rng = np.random.default_rng(seed)
    return ScalarField(grid, rng.uniform(0.5, 1.5, grid.shape))


class KernelConstructionTestCase(SimpleTestCase):

    def test_top_hat_l1_norm_is_exact(self):
        grid = make_grid(1, 2. * np.pi, 256)
        kernel = build_kernel(KernelSpec(radius=0.25), grid)
        self.assertAlmostEqual(kernel.l1_norm, 0.5, places=13)
        self.assertAlmostEqual(kernel.l1_norm_max_entry, 0.5, places=13)

    def test_radius_must_stay_below_half_period(self):
        grid = make_grid(1, 2. * np.pi, 32)
        with self.assertRaises(KernelError):
            build_kernel(KernelSpec(radius=np.pi), grid)

    def test_invalid_specs(self):
        for kwargs in [{'kind': 'diagonal'}, {'profile': 'gaussian'}, {'radius': 0.}, {'amplitude': -1.},
                       {'profile': 'exponential'}]:
            with self.assertRaises(KernelError):
                KernelSpec(**kwargs)

    def test_projection_kernel_is_positive_semidefinite(self):
        grid = make_grid(2, 2. * np.pi, 16)
        kernel = build_kernel(KernelSpec(kind='projection', profile='bump', radius=1.5), grid)
        eigenvalues = np.linalg.eigvalsh(np.moveaxis(kernel.entries, (0, 1), (-2, -1)))
        self.assertGreaterEqual(eigenvalues.min(), -1e-14)
        self.assertLessEqual(kernel.l1_norm_max_entry, kernel.l1_norm + 1e-14)
        self.assertAlmostEqual(kernel_l1_norm(kernel), kernel.l1_norm, places=14)
        self.assertAlmostEqual(kernel_l1_norm(kernel, 'max_entry'), kernel.l1_norm_max_entry, places=14)
        with self.assertRaises(KernelError):
            kernel_l1_norm(kernel, 'frobenius')


class ConvolutionTestCase(SimpleTestCase):

    def test_fast_matches_direct(self):
        for dim, points in [(1, 64), (2, 32)]:
            grid = make_grid(dim, 2. * np.pi, points)
            f = random_vector(grid, dim)
            for kind in ('isotropic', 'projection'):
                kernel = build_kernel(KernelSpec(kind=kind, profile='bump', radius=1.), grid)
                fast = convolve(kernel, f).components
                direct = convolve(kernel, f, method='direct').components
                self.assertLessEqual(np.max(np.abs(fast - direct)) / np.max(np.abs(direct)), 1e-10)

    def test_unknown_method(self):
        grid = make_grid(1, 2. * np.pi, 16)
        kernel = build_kernel(KernelSpec(), grid)
        with self.assertRaises(KernelError):
            convolve(kernel, random_vector(grid, 0), method='slow')

    def test_weight_convolution_of_constant(self):
        grid = make_grid(1, 2. * np.pi, 64)
        kernel = build_kernel(KernelSpec(radius=0.5), grid)
        result = convolve_weight(kernel, ScalarField(grid, np.full(64, 2.)))
        assert_allclose(result[0, 0], 2. * kernel.l1_norm, rtol=1e-12)

    def test_young_monitor(self):
        grid = make_grid(2, 2. * np.pi, 16)
        kernel = build_kernel(KernelSpec(kind='projection', radius=1.2), grid)
        monitor = YoungMonitor(kernel)
        for seed in range(5):
            convolve(kernel, random_vector(grid, seed), monitor=monitor)
        self.assertTrue(monitor.ok)
        self.assertEqual(monitor.checks, 5)
        self.assertLessEqual(monitor.worst_ratio, 1. + 1e-12)
        with self.assertLogs('alignment.kernel', 'WARNING'):
            self.assertFalse(monitor.check(2. * kernel.l1_norm, 1.))
        self.assertEqual(monitor.violations, 1)


class AlignmentForceTestCase(SimpleTestCase):

    def test_constant_velocity_gives_no_force(self):
        grid = make_grid(2, 2. * np.pi, 32)
        u = VectorField(grid, np.stack([np.full(grid.shape, 0.7), np.full(grid.shape, -0.3)]))
        for kind in ('isotropic', 'projection'):
            kernel = build_kernel(KernelSpec(kind=kind, radius=1.), grid)
            force = alignment_force(kernel, u, random_weight(grid, 3), 2.)
            self.assertLessEqual(np.max(np.abs(force.components)), 1e-12)

    def test_matches_double_sum(self):
        for dim, points in [(1, 32), (2, 16)]:
            grid = make_grid(dim, 2. * np.pi, points)
            kernel = build_kernel(KernelSpec(kind='projection', profile='exponential', radius=1.5, rate=0.5), grid)
            u, w = random_vector(grid, 7), random_weight(grid, 8)
            fast = alignment_force(kernel, u, w, 1.3).components
            direct = alignment_force_direct(kernel, u, w, 1.3).components
            assert_allclose(fast, direct, atol=1e-10 * np.max(np.abs(direct)))

    def test_nonpositive_weight_is_rejected(self):
        grid = make_grid(1, 2. * np.pi, 16)
        kernel = build_kernel(KernelSpec(), grid)
        with self.assertRaises(AdmissibilityError):
            alignment_force(kernel, random_vector(grid, 0), ScalarField(grid, np.zeros(16)), 1.)

    def test_zero_amplitude_switches_alignment_off(self):
        grid = make_grid(1, 2. * np.pi, 16)
        kernel = build_kernel(KernelSpec(amplitude=0.), grid)
        force = alignment_force(kernel, random_vector(grid, 0), random_weight(grid, 1), 1.)
        self.assertEqual(np.max(np.abs(force.components)), 0.)


def reflected(values, grid):
    """values at -x over the trailing grid axes"""
    for axis in range(values.ndim - grid.dim, values.ndim):
        values = np.take(values, (-np.arange(grid.points)) % grid.points, axis=axis)
    return values


class KernelSymmetryTestCase(SimpleTestCase):

    def setUp(self):
        self.grid = make_grid(2, 2. * np.pi, 32)
        x, y = self.grid.coordinates
        self.smooth = VectorField(self.grid, np.stack([np.sin(x) * np.cos(2. * y), np.cos(x + y) + 0.2]))
        self.even = VectorField(self.grid, np.stack([np.cos(x) * np.cos(2. * y), 0.5 * np.cos(x + y)]))

    def kernels(self):
        for kind in ('isotropic', 'projection'):
            yield build_kernel(KernelSpec(kind=kind, profile='bump', radius=1.2), self.grid)

    def test_derivative_commutes_with_convolution(self):
        for kernel in self.kernels():
            convolved = convolve(kernel, self.smooth).components
            for axis in range(2):
                derivative = VectorField(self.grid, np.array([spectral_grad(self.smooth.component(j)).components[axis]
                                                              for j in range(2)]))
                from_derivative = convolve(kernel, derivative).components
                for i in range(2):
                    of_convolution = spectral_grad(ScalarField(self.grid, convolved[i])).components[axis]
                    assert_allclose(of_convolution, from_derivative[i], atol=1e-9)

    def test_even_fields_stay_even(self):
        for kernel in self.kernels():
            assert_allclose(reflected(kernel.entries, self.grid), kernel.entries, atol=1e-15)
            convolved = convolve(kernel, self.even).components
            assert_allclose(reflected(convolved, self.grid), convolved, atol=1e-10)

    def test_projection_trace_is_the_profile(self):
        spec = KernelSpec(kind='projection', profile='bump', radius=1.2)
        projection = build_kernel(spec, self.grid)
        isotropic = build_kernel(KernelSpec(profile='bump', radius=1.2), self.grid)
        assert_allclose(projection.entries[0, 0] + projection.entries[1, 1], isotropic.entries[0, 0], atol=1e-14)
        assert_allclose(projection.entries[0, 1], projection.entries[1, 0], atol=0.)

    def test_projection_kernel_is_isotropic_in_one_dimension(self):
        grid = make_grid(1, 2. * np.pi, 64)
        for profile in ('top_hat', 'bump'):
            projection = build_kernel(KernelSpec(kind='projection', profile=profile, radius=0.7), grid)
            isotropic = build_kernel(KernelSpec(profile=profile, radius=0.7), grid)
            np.testing.assert_array_equal(projection.entries, isotropic.entries)
            self.assertEqual(projection.l1_norm, isotropic.l1_norm)

    def test_l1_norm_is_homogeneous_in_the_amplitude(self):
        for kind in ('isotropic', 'projection'):
            for profile in ('top_hat', 'bump'):
                single = build_kernel(KernelSpec(kind=kind, profile=profile, radius=1.2), self.grid)
                double = build_kernel(KernelSpec(kind=kind, profile=profile, radius=1.2, amplitude=2.), self.grid)
                self.assertAlmostEqual(double.l1_norm / single.l1_norm, 2., places=13)
                self.assertAlmostEqual(kernel_l1_norm(double, 'max_entry') / kernel_l1_norm(single, 'max_entry'), 2.,
                                       places=13)

    def test_alignment_force_ignores_a_common_velocity_shift(self):
        w = random_weight(self.grid, 5)
        u = random_vector(self.grid, 6)
        shifted = VectorField(self.grid, u.components + np.array([3., -1.5]).reshape(2, 1, 1))
        for kernel in self.kernels():
            force = alignment_force(kernel, u, w, 1.1).components
            assert_allclose(alignment_force(kernel, shifted, w, 1.1).components, force, atol=1e-12)
