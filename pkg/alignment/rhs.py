"""
Right-hand sides of the damped Euler-alignment system.

* ``rhs_primitive``: pseudo-spectral (rho, u), mass equation in divergence form.
* ``rhs_symmetrized``: pseudo-spectral (sigma, u) after the sound-speed change of variables.
* ``rhs_llf``: first-order local Lax-Friedrichs finite volumes on the conserved (rho, rho u).

The alignment integral is a zeroth-order source in all three.
"""
import numpy as np

from .eos_transform import check_density, pressure_values, shifted_sound_speed, sound_speed_values
from .grid_field import advective_derivative, divergence, gradient
from .kernel import alignment_force_values
from .state import Tendency


def rhs_primitive(state, eos, kernel, monitor=None):
    """
    d rho/dt = -div(rho u)
    du/dt = -(u . grad) u - grad p / rho - u / tau - a integral Gamma(x - y) (u(x) - u(y)) rho(y) dy

    :raises AdmissibilityError: rho is not above the vacuum floor
    """
    grid = state.grid
    rho = state.density_like.values
    u = state.velocity.components
    p = pressure_values(rho, eos)
    drho = -divergence(rho * u, grid)
    du = (-advective_derivative(u, u, grid) - gradient(p, grid) / rho - eos.damping_rate * u
          + alignment_force_values(kernel, u, rho, eos.a, monitor))
    return Tendency(drho, du)


def rhs_symmetrized(state, eos, kernel, monitor=None):
    """
    d sigma/dt = -kappa_bar div u - u . grad sigma - (sigma/nu) div u
    du/dt = -kappa_bar grad sigma - u / tau - (u . grad) u - (sigma/nu) grad sigma
            - a_sym integral Gamma(x - y) (u(x) - u(y)) (sigma(y)/nu + kappa_bar)^nu dy

    :raises AdmissibilityError: sigma/nu + kappa_bar is not above the vacuum floor
    """
    grid = state.grid
    sigma = state.density_like.values
    u = state.velocity.components
    weight = shifted_sound_speed(sigma, eos) ** eos.nu
    div_u = divergence(u, grid)
    grad_sigma = gradient(sigma, grid)
    dsigma = -eos.kappa_bar * div_u - np.sum(u * grad_sigma, axis=0) - sigma / eos.nu * div_u
    du = (-eos.kappa_bar * grad_sigma - eos.damping_rate * u - advective_derivative(u, u, grid)
          - sigma / eos.nu * grad_sigma + alignment_force_values(kernel, u, weight, eos.a_sym, monitor))
    return Tendency(dsigma, du)


def _llf_flux_difference(rho, momentum, u, p, speed, axis, grid):
    """-(F_{i+1/2} - F_{i-1/2}) / h along one axis for the stacked conserved variables"""
    conserved = np.concatenate([rho[None], momentum])
    flux = np.concatenate([momentum[axis][None], momentum * u[axis]])
    flux[1 + axis] += p
    spatial_axis = axis + 1
    right_state = np.roll(conserved, -1, axis=spatial_axis)
    right_flux = np.roll(flux, -1, axis=spatial_axis)
    alpha = np.maximum(speed, np.roll(speed, -1, axis=axis))
    interface = 0.5 * (flux + right_flux) - 0.5 * alpha * (right_state - conserved)
    return -(interface - np.roll(interface, 1, axis=spatial_axis)) / grid.spacing


def rhs_llf(state, eos, kernel, monitor=None):
    """
    Finite-volume tendency of (rho, rho u) with the local Lax-Friedrichs (Rusanov) interface flux; the
    interface dissipation uses the larger of the two adjacent values of |u_n| + kappa.
    """
    grid = state.grid
    rho = state.density_like.values
    check_density(rho)
    u = state.velocity.components
    momentum = rho * u
    p = pressure_values(rho, eos)
    kappa = sound_speed_values(rho, eos)
    change = np.zeros((grid.dim + 1,) + grid.shape)
    for axis in range(grid.dim):
        change += _llf_flux_difference(rho, momentum, u, p, np.abs(u[axis]) + kappa, axis, grid)
    source = -eos.damping_rate * momentum + rho * alignment_force_values(kernel, u, rho, eos.a, monitor)
    return Tendency(change[0], change[1:] + source, conservative=True)


RHS = {
    ('primitive', 'spectral'): rhs_primitive,
    ('symmetrized', 'spectral'): rhs_symmetrized,
    ('primitive', 'llf_fv'): rhs_llf,
}
