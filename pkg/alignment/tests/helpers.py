import numpy as np

from alignment.eos_transform import EosParams, rho_from_sigma_values
from alignment.grid_field import make_grid
from alignment.kernel import KernelSpec, build_kernel
from alignment.state import Formulation, SimState

REFERENCE_CONFIG = """
[grid]
dim = 1
points = {points}

[eos]
gamma = 2
rho_bar = 0.5
a_sym = {a_sym}
tau = 0.4

[kernel]
radius = 0.25

[scheme]
t_end = {t_end}

[initial]
perturbation = single_mode
amplitude = {amplitude}
"""


def reference_eos(a_sym=1.):
    """gamma = 2, rho_bar = 0.5 (so kappa_bar = 1 and nu = 2), tau = 0.4"""
    return EosParams.with_symmetrized_alignment(a_sym, A=1., gamma=2., rho_bar=0.5, tau=0.4)


def reference_setup(points=256, a_sym=1.):
    """grid, constants and the top-hat kernel with ||Gamma||_L1 = 0.5 whose threshold margin is 2.5 - a_sym"""
    grid = make_grid(1, 2. * np.pi, points)
    return grid, reference_eos(a_sym), build_kernel(KernelSpec(radius=0.25), grid)


def single_mode_state(grid, amplitude, eos=None, primitive=False):
    """sigma = eps sin x, u = -eps cos x, or the equivalent primitive state"""
    x = grid.coordinates[0]
    sigma = amplitude * np.sin(x)
    u = -amplitude * np.cos(x)[None]
    if primitive:
        return SimState.from_arrays(Formulation.PRIMITIVE, grid, rho_from_sigma_values(sigma, eos), u)
    return SimState.from_arrays(Formulation.SYMMETRIZED, grid, sigma, u)


def reference_config_text(points=256, a_sym=1., t_end=5., amplitude=1e-2, extra=''):
    return REFERENCE_CONFIG.format(points=points, a_sym=a_sym, t_end=t_end, amplitude=amplitude) + extra
