"""
Periodic grids, grid-sampled fields, spectral differentiation and discrete norms.

All transforms are plain ``numpy.fft`` transforms over the spatial axes of an array, so a
``VectorField`` (components stacked on axis 0) and a ``ScalarField`` share the same code paths.
"""
from dataclasses import dataclass
from functools import cached_property
import logging
import numpy as np

from .exceptions import GridError, NonFiniteError, UnsupportedNormError

logger = logging.getLogger(__name__)

SUPPORTED_DIMS = (1, 2)
MIN_POINTS = 8
MAX_SOBOLEV_ORDER = 4


@dataclass(frozen=True)
class Grid:
    """
    Uniform lattice on the torus [0, L)^dim.

    :param dim: number of spatial dimensions (1 or 2)
    :param length: torus period L, the same on every axis
    :param points: number of points n per axis (a power of two, at least 8)
    """
    dim: int
    length: float
    points: int

    @property
    def spacing(self):
        return self.length / self.points

    @property
    def shape(self):
        return (self.points,) * self.dim

    @property
    def axes(self):
        """spatial axes of an array whose leading axes (if any) index components"""
        return tuple(range(-self.dim, 0))

    @property
    def cell_volume(self):
        return self.spacing ** self.dim

    @cached_property
    def mode_indices(self):
        # 0, 1, ..., n/2-1, -n/2, ..., -1
        return np.rint(np.fft.fftfreq(self.points, d=1. / self.points)).astype(int)

    @cached_property
    def wavenumbers(self):
        return 2. * np.pi / self.length * self.mode_indices

    @cached_property
    def wave_vectors(self):
        return np.array(np.meshgrid(*[self.wavenumbers] * self.dim, indexing='ij'))

    @cached_property
    def derivative_wave_vectors(self):
        k = self.wavenumbers.copy()
        k[self.points // 2] = 0.  # Nyquist mode of a derivative is dropped so real fields stay real
        return np.array(np.meshgrid(*[k] * self.dim, indexing='ij'))

    @cached_property
    def k_squared(self):
        return np.sum(self.wave_vectors ** 2, axis=0)

    @cached_property
    def derivative_k_squared(self):
        return np.sum(self.derivative_wave_vectors ** 2, axis=0)

    @cached_property
    def coordinates(self):
        x = np.arange(self.points) * self.spacing
        return np.array(np.meshgrid(*[x] * self.dim, indexing='ij'))

    @cached_property
    def offsets(self):
        """signed displacement of every grid point from the origin, in transform order"""
        return np.array(np.meshgrid(*[self.mode_indices * self.spacing] * self.dim, indexing='ij'))

    @cached_property
    def dealias_mask(self):
        keep = np.abs(self.mode_indices) <= self.points // 3
        return np.all(np.array(np.meshgrid(*[keep] * self.dim, indexing='ij')), axis=0)

    @property
    def fourier_weight(self):
        """factor turning sum_k |f_k|^2 of an unnormalized transform into the quadrature of |f|^2"""
        return self.cell_volume / self.points ** self.dim


def make_grid(dim, length, points):
    """
    Builds a periodic grid after checking the transform contract.

    :raises GridError: unsupported dimension, non-positive length, or a point count that is not a power of
        two of at least 8
    """
    if dim not in SUPPORTED_DIMS:
        raise GridError(f'dim must be one of {SUPPORTED_DIMS}, got {dim}')
    if not length > 0.:
        raise GridError(f'torus length must be positive, got {length}')
    if int(points) != points or points < MIN_POINTS or int(points) & (int(points) - 1):
        raise GridError(f'points must be a power of two >= {MIN_POINTS}, got {points}')
    grid = Grid(int(dim), float(length), int(points))
    logger.debug(f'Built {dim}D grid: L={length}, n={points}, h={grid.spacing:.6g}')
    return grid


def _checked(grid, values, leading):
    values = np.asarray(values, dtype=float)
    expected = leading + grid.shape
    if values.shape != expected:
        raise GridError(f'expected an array of shape {expected}, got {values.shape}')
    if not np.isfinite(values).all():
        raise NonFiniteError(message='field contains non-finite values')
    return values


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _checked(self.grid, self.values, ()))


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: Grid
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'components', _checked(self.grid, self.components, (self.grid.dim,)))

    def component(self, j):
        return ScalarField(self.grid, self.components[j])


def same_grid(*fields):
    """Returns the common grid of the fields, raising ``GridError`` on a mismatch."""
    grid = fields[0].grid
    for field in fields[1:]:
        if field.grid != grid:
            raise GridError(f'grid mismatch: {field.grid} vs {grid}')
    return grid


def transform(values, grid):
    return np.fft.fftn(values, axes=grid.axes)


def inverse_transform(values_hat, grid):
    return np.fft.ifftn(values_hat, axes=grid.axes).real


def gradient(values, grid):
    """array-level spectral gradient; ``values`` has the grid shape, the result has a leading dim axis"""
    values_hat = transform(values, grid)
    return inverse_transform(1j * grid.derivative_wave_vectors * values_hat, grid)


def divergence(components, grid):
    components_hat = transform(components, grid)
    return inverse_transform(np.sum(1j * grid.derivative_wave_vectors * components_hat, axis=0), grid)


def advective_derivative(velocity, values, grid):
    """(u . grad) f for a scalar array, or componentwise for a stacked array of components"""
    if values.ndim == grid.dim:
        return np.sum(velocity * gradient(values, grid), axis=0)
    return np.array([np.sum(velocity * gradient(c, grid), axis=0) for c in values])


def dealias(values, grid):
    """2/3-rule projection of an array (scalar or stacked components)"""
    return inverse_transform(grid.dealias_mask * transform(values, grid), grid)


def spectral_grad(f):
    return VectorField(f.grid, gradient(f.values, f.grid))


def spectral_div(v):
    return ScalarField(v.grid, divergence(v.components, v.grid))


def spectral_laplacian(f):
    return ScalarField(f.grid, inverse_transform(-f.grid.k_squared * transform(f.values, f.grid), f.grid))


def spectral_antiderivative(f, axis=0):
    """
    Inverse of the derivative along ``axis`` on the modes where that derivative is invertible; the modes
    with zero (or Nyquist) wavenumber along ``axis`` are dropped.
    """
    k = f.grid.derivative_wave_vectors[axis]
    inverse = np.zeros_like(k)
    nonzero = k != 0.
    inverse[nonzero] = 1. / k[nonzero]
    f_hat = transform(f.values, f.grid)
    return ScalarField(f.grid, inverse_transform(-1j * inverse * f_hat, f.grid))


def _magnitude(f):
    if isinstance(f, VectorField):
        return np.sqrt(np.sum(f.components ** 2, axis=0))
    return np.abs(f.values)


def _data(f):
    return f.components if isinstance(f, VectorField) else f.values


def lp_norm(f, p):
    """
    Riemann-sum L^p norm of a scalar field, or of the pointwise Euclidean magnitude of a vector field.

    :param p: 1, 2 or infinity (``np.inf``, ``float('inf')`` or the string ``'inf'``)
    """
    if isinstance(p, str) and p.lower() in ('inf', 'infinity'):
        p = np.inf
    magnitude = _magnitude(f)
    if p == np.inf:
        return float(np.max(magnitude))
    if p == 1:
        return float(np.sum(magnitude) * f.grid.cell_volume)
    if p == 2:
        return float(np.sqrt(np.sum(magnitude ** 2) * f.grid.cell_volume))
    raise UnsupportedNormError(f'unsupported L^p exponent {p}; use 1, 2 or inf')


def inner(f, g):
    """quadrature of f . g over the torus"""
    grid = same_grid(f, g)
    return float(np.sum(_data(f) * _data(g)) * grid.cell_volume)


def _check_order(s):
    if int(s) != s or not 0 <= s <= MAX_SOBOLEV_ORDER:
        raise UnsupportedNormError(f'Sobolev order must be an integer in [0, {MAX_SOBOLEV_ORDER}], got {s}')
    return int(s)


def sobolev_inner(f, g, s, start=0):
    """
    sum_{r=start}^{s} <grad^r f, grad^r g>, with all mixed partials aggregated through the Fourier
    multiplier |k|^{2r}. ``f`` and ``g`` must both be scalar or both vector fields.
    """
    s = _check_order(s)
    grid = same_grid(f, g)
    weights = sum(grid.derivative_k_squared ** r for r in range(start, s + 1))
    f_hat = transform(_data(f), grid)
    g_hat = f_hat if g is f else transform(_data(g), grid)
    return float(np.sum(weights * (np.conj(f_hat) * g_hat).real) * grid.fourier_weight)


def sobolev_norm_sq(f, s, start=0):
    """sum_{r=start}^{s} ||grad^r f||_{L^2}^2 (the squared H^s norm for ``start=0``)"""
    return sobolev_inner(f, f, s, start=start)


def grad_norm_sq(f, r):
    return sobolev_inner(f, f, r, start=r)


def cross_term(u, sigma, s, start=1):
    """sum_{r=start}^{s} integral of grad^{r-1} u . grad^r sigma, evaluated on the Fourier side"""
    s = _check_order(s)
    grid = same_grid(u, sigma)
    if start > s:
        return 0.
    weights = sum(grid.derivative_k_squared ** (r - 1) for r in range(start, s + 1))
    u_hat = transform(u.components, grid)
    sigma_hat = transform(sigma.values, grid)
    pairing = np.sum(np.conj(u_hat) * 1j * grid.derivative_wave_vectors * sigma_hat, axis=0)
    return float(np.sum(weights * pairing.real) * grid.fourier_weight)
