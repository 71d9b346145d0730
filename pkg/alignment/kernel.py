"""
Matrix-valued influence kernels on the periodic grid, periodic convolution and the nonlocal alignment force.
"""
from dataclasses import dataclass
import logging
import numpy as np

from .exceptions import AdmissibilityError, KernelError
from .grid_field import VectorField, same_grid, transform, inverse_transform

logger = logging.getLogger(__name__)

KINDS = ('isotropic', 'projection')
PROFILES = ('top_hat', 'bump', 'exponential')
TOP_HAT_SUBSAMPLES = 8


@dataclass(frozen=True)
class KernelSpec:
    """
    :param kind: ``isotropic`` (phi(|x|) I) or ``projection`` (phi(|x|) x/|x| (x) x/|x|)
    :param profile: radial profile phi, one of ``top_hat``, ``bump`` or ``exponential``
    :param radius: support radius R (the cutoff for ``exponential``)
    :param amplitude: scaling of phi, zero switches the alignment off
    :param rate: decay rate of the ``exponential`` profile
    """
    kind: str = 'isotropic'
    profile: str = 'top_hat'
    radius: float = 0.5
    amplitude: float = 1.
    rate: float = None

    def __post_init__(self):
        errors = []
        if self.kind not in KINDS:
            errors.append(f'kernel kind must be one of {KINDS}, got {self.kind!r}')
        if self.profile not in PROFILES:
            errors.append(f'kernel profile must be one of {PROFILES}, got {self.profile!r}')
        if not self.radius > 0.:
            errors.append(f'kernel radius must be positive, got {self.radius}')
        if not self.amplitude >= 0.:
            errors.append(f'kernel amplitude must be nonnegative, got {self.amplitude}')
        if self.profile == 'exponential' and not (self.rate is not None and self.rate > 0.):
            errors.append(f'the exponential profile needs a positive rate, got {self.rate}')
        if errors:
            raise KernelError('; '.join(errors))


@dataclass(frozen=True, eq=False)
class Kernel:
    """
    Sampled kernel. ``entries[i, j]`` holds Gamma_ij at the signed offsets of the grid (origin at index 0,
    transform order), so a circular convolution with it is the periodic convolution on the torus.
    """
    grid: object
    spec: KernelSpec
    entries: np.ndarray
    entries_hat: np.ndarray
    l1_norm: float
    l1_norm_max_entry: float

    @property
    def is_diagonal(self):
        return self.spec.kind == 'isotropic' or self.grid.dim == 1


def _profile(spec, r):
    if spec.profile == 'bump':
        phi = np.zeros_like(r)
        inside = r < spec.radius
        phi[inside] = np.exp(1. - 1. / (1. - (r[inside] / spec.radius) ** 2))
    elif spec.profile == 'exponential':
        phi = np.where(r <= spec.radius, np.exp(-spec.rate * r), 0.)
    else:
        phi = (r <= spec.radius).astype(float)
    return spec.amplitude * phi


def _top_hat_cell_average(spec, grid):
    h = grid.spacing
    if grid.dim == 1:
        x = grid.offsets[0]
        overlap = np.minimum(x + h / 2., spec.radius) - np.maximum(x - h / 2., -spec.radius)
        return spec.amplitude * np.clip(overlap, 0., None) / h
    sub = (np.arange(TOP_HAT_SUBSAMPLES) + 0.5) * h / TOP_HAT_SUBSAMPLES - h / 2.
    average = np.zeros(grid.shape)
    for dx in sub:
        for dy in sub:
            r = np.hypot(grid.offsets[0] + dx, grid.offsets[1] + dy)
            average += r <= spec.radius
    return spec.amplitude * average / TOP_HAT_SUBSAMPLES ** 2


def _sample_profile(spec, grid):
    if spec.profile == 'top_hat':
        return _top_hat_cell_average(spec, grid)
    return _profile(spec, np.sqrt(np.sum(grid.offsets ** 2, axis=0)))


def _pointwise_norms(entries):
    matrices = np.moveaxis(entries, (0, 1), (-2, -1))
    spectral = np.max(np.abs(np.linalg.eigvalsh(matrices)), axis=-1)
    max_entry = np.max(np.abs(matrices), axis=(-2, -1))
    return spectral, max_entry


def build_kernel(spec, grid):
    """
    Samples Gamma on the grid and precomputes its transforms and L^1 norms.

    The projection direction x/|x| is undefined at the origin; there Gamma(0) = (phi(0)/dim) I, the angular
    average of the projection.

    :raises KernelError: the support radius is not below L/2
    """
    if not spec.radius < grid.length / 2.:
        raise KernelError(f'kernel support radius {spec.radius} must be below L/2 = {grid.length / 2.:.6g}')
    phi = _sample_profile(spec, grid)
    dim = grid.dim
    identity = np.eye(dim).reshape((dim, dim) + (1,) * dim)
    if spec.kind == 'isotropic' or dim == 1:
        entries = identity * phi
    else:
        x = grid.offsets
        r2 = np.sum(x ** 2, axis=0)
        r2[(0,) * dim] = 1.
        entries = phi * x[:, None] * x[None, :] / r2
        entries[(slice(None), slice(None)) + (0,) * dim] = phi[(0,) * dim] / dim * np.eye(dim)
    entries_hat = transform(entries, grid)
    spectral, max_entry = _pointwise_norms(entries)
    kernel = Kernel(grid=grid, spec=spec, entries=entries, entries_hat=entries_hat,
                    l1_norm=float(np.sum(spectral) * grid.cell_volume),
                    l1_norm_max_entry=float(np.sum(max_entry) * grid.cell_volume))
    logger.debug(f'Built {spec.kind} {spec.profile} kernel on {dim}D grid: ||Gamma||_L1 = {kernel.l1_norm:.6g} '
                 f'(max-entry {kernel.l1_norm_max_entry:.6g})')
    return kernel


def kernel_l1_norm(kernel, convention='spectral'):
    """
    Recomputes the integral over the torus of the pointwise matrix norm of Gamma.

    :param convention: ``spectral`` (matrix 2-norm) or ``max_entry`` (largest absolute entry)
    """
    spectral, max_entry = _pointwise_norms(kernel.entries)
    if convention == 'spectral':
        return float(np.sum(spectral) * kernel.grid.cell_volume)
    if convention == 'max_entry':
        return float(np.sum(max_entry) * kernel.grid.cell_volume)
    raise KernelError(f'unknown L1 norm convention {convention!r}')


class YoungMonitor:
    """
    Checks ||Gamma * f||_inf <= ||Gamma||_L1 ||f||_inf for every convolution it is shown. Violations are logged
    and counted, never raised, so a run can report them in its diagnostics.
    """
    tolerance = 1e-12

    def __init__(self, kernel):
        self.l1_norm = kernel.l1_norm
        self.checks = 0
        self.violations = 0
        self.worst_ratio = 0.

    @property
    def ok(self):
        return self.violations == 0

    def check(self, output_sup, input_sup):
        self.checks += 1
        if input_sup == 0. or self.l1_norm == 0.:
            return True
        ratio = output_sup / (self.l1_norm * input_sup)
        self.worst_ratio = max(self.worst_ratio, ratio)
        if ratio > 1. + self.tolerance:
            self.violations += 1
            logger.warning(f'Young bound violated: ||Gamma*f||_inf / (||Gamma||_L1 ||f||_inf) = {ratio:.15g}')
            return False
        return True


def _vector_sup(components):
    return float(np.max(np.sqrt(np.sum(components ** 2, axis=0))))


def _matrix_sup(matrices, dim):
    if dim == 1:
        return float(np.max(np.abs(matrices)))
    return float(np.max(np.abs(np.linalg.eigvalsh(np.moveaxis(matrices, (0, 1), (-2, -1))))))


def convolve_values(kernel, components, monitor=None):
    """periodic Gamma * f for stacked components of shape (dim, *grid.shape), fast transform method"""
    grid = kernel.grid
    f_hat = transform(components, grid)
    if kernel.is_diagonal:
        result_hat = kernel.entries_hat[np.arange(grid.dim), np.arange(grid.dim)] * f_hat
    else:
        result_hat = np.einsum('ij...,j...->i...', kernel.entries_hat, f_hat)
    result = inverse_transform(result_hat, grid) * grid.cell_volume
    if monitor is not None:
        monitor.check(_vector_sup(result), _vector_sup(components))
    return result


def convolve_weight_values(kernel, weight, monitor=None):
    """matrix field (Gamma * w)_ij for a scalar weight array"""
    grid = kernel.grid
    result = inverse_transform(kernel.entries_hat * transform(weight, grid), grid) * grid.cell_volume
    if monitor is not None:
        monitor.check(_matrix_sup(result, grid.dim), float(np.max(np.abs(weight))))
    return result


def _circulant_indices(grid):
    points = np.indices(grid.shape).reshape(grid.dim, -1)
    differences = (points[:, :, None] - points[:, None, :]) % grid.points
    return np.ravel_multi_index(tuple(differences), grid.shape)


def _direct_matrices(kernel):
    circulant = _circulant_indices(kernel.grid)
    dim = kernel.grid.dim
    return [[kernel.entries[i, j].ravel()[circulant] for j in range(dim)] for i in range(dim)]


def convolve(kernel, f, method='fast', monitor=None):
    """
    Periodic matrix convolution, component i of the result being sum_j Gamma_ij * f_j with quadrature weight
    h^dim. ``direct`` is the brute-force double sum over all grid pairs; ``fast`` multiplies transforms.
    """
    same_grid(kernel, f)
    if method == 'fast':
        return VectorField(f.grid, convolve_values(kernel, f.components, monitor))
    if method != 'direct':
        raise KernelError(f'unknown convolution method {method!r}')
    grid = f.grid
    matrices = _direct_matrices(kernel)
    flat = f.components.reshape(grid.dim, -1)
    result = np.array([sum(matrices[i][j] @ flat[j] for j in range(grid.dim)) for i in range(grid.dim)])
    return VectorField(grid, result.reshape((grid.dim,) + grid.shape) * grid.cell_volume)


def convolve_weight(kernel, w, monitor=None):
    """(Gamma * w)(x) as a stacked array of shape (dim, dim, *grid.shape)"""
    same_grid(kernel, w)
    return convolve_weight_values(kernel, w.values, monitor)


def alignment_force_values(kernel, velocity, weight, coeff, monitor=None):
    """
    -coeff [ (Gamma * w)(x) u(x) - (Gamma * (u w))(x) ], the expanded form of
    -coeff integral Gamma(x - y) (u(x) - u(y)) w(y) dy.
    """
    minimum = float(np.min(weight))
    if not minimum > 0.:
        raise AdmissibilityError('alignment weight', minimum, 0.)
    if coeff == 0. or kernel.spec.amplitude == 0.:
        return np.zeros_like(velocity)
    weighted = convolve_weight_values(kernel, weight, monitor)
    transported = convolve_values(kernel, velocity * weight, monitor)
    return -coeff * (np.einsum('ij...,j...->i...', weighted, velocity) - transported)


def alignment_force(kernel, u, w, coeff, monitor=None):
    """
    Nonlocal alignment force with density weight ``w``.

    :raises GridError: the fields and the kernel live on different grids
    :raises AdmissibilityError: the weight is not positive everywhere
    """
    same_grid(kernel, u, w)
    return VectorField(u.grid, alignment_force_values(kernel, u.components, w.values, coeff, monitor))


def alignment_force_direct(kernel, u, w, coeff):
    """brute-force double sum of -coeff Gamma(x - y) (u(x) - u(y)) w(y) h^dim over all grid pairs"""
    grid = same_grid(kernel, u, w)
    circulant = _circulant_indices(grid)
    dim = grid.dim
    flat_u = u.components.reshape(dim, -1)
    flat_w = w.values.ravel()
    force = np.zeros_like(flat_u)
    for i in range(dim):
        for j in range(dim):
            gamma = kernel.entries[i, j].ravel()[circulant]
            difference = flat_u[j][:, None] - flat_u[j][None, :]
            force[i] -= coeff * np.sum(gamma * difference * flat_w[None, :], axis=1) * grid.cell_volume
    return VectorField(grid, force.reshape((dim,) + grid.shape))
