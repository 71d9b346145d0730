"""
Polytropic pressure law P = A rho^gamma, its sound speed, and the change of variables
sigma = nu (kappa(rho) - kappa_bar), nu = 2 / (gamma - 1), that symmetrizes the Euler system.

The public functions take and return ``ScalarField`` objects; the ``*_values`` variants work on bare arrays
and are what the right-hand sides call inside the time loop.
"""
from dataclasses import dataclass, replace
import logging
import numpy as np
from django.conf import settings

from .exceptions import AdmissibilityError, EosError
from .grid_field import ScalarField

logger = logging.getLogger(__name__)

VACUUM_FLOOR = 1e-12
MIN_GAMMA = 1. + 1e-6


def vacuum_floor():
    """admissibility floor for rho and sigma/nu + kappa_bar, overridable through ``settings.ALIGNMENT``"""
    if settings.configured:
        return float(getattr(settings, 'ALIGNMENT', {}).get('VACUUM_FLOOR', VACUUM_FLOOR))
    return VACUUM_FLOOR


@dataclass(frozen=True)
class EosParams:
    """
    All model constants in one place.

    :param A: pressure constant
    :param gamma: adiabatic exponent, strictly above 1
    :param rho_bar: background density
    :param a: alignment strength of the primitive momentum equation
    :param tau: damping time; ``np.inf`` switches damping off
    """
    A: float
    gamma: float
    rho_bar: float
    a: float
    tau: float

    def __post_init__(self):
        errors = []
        if not self.A > 0.:
            errors.append(f'A must be positive, got {self.A}')
        if not self.gamma >= MIN_GAMMA:
            errors.append(f'gamma must be > 1 (at least {MIN_GAMMA}), got {self.gamma}')
        if not self.rho_bar > 0.:
            errors.append(f'rho_bar must be positive, got {self.rho_bar}')
        if not self.a >= 0.:
            errors.append(f'alignment strength a must be nonnegative, got {self.a}')
        if not self.tau > 0.:
            errors.append(f'tau must be positive (or inf), got {self.tau}')
        if errors:
            raise EosError('; '.join(errors))

    @classmethod
    def with_symmetrized_alignment(cls, a_sym, A=1., gamma=2., rho_bar=1., tau=np.inf):
        """Builds parameters from the coefficient of the symmetrized alignment term instead of ``a``."""
        if not gamma >= MIN_GAMMA:
            raise EosError(f'gamma must be > 1 (at least {MIN_GAMMA}), got {gamma}')
        return cls(A=A, gamma=gamma, rho_bar=rho_bar, a=a_sym * (A * gamma) ** (1. / (gamma - 1.)), tau=tau)

    @property
    def nu(self):
        return 2. / (self.gamma - 1.)

    @property
    def kappa_bar(self):
        return np.sqrt(self.A * self.gamma) * self.rho_bar ** ((self.gamma - 1.) / 2.)

    @property
    def a_sym(self):
        """a (A gamma)^(-1/(gamma-1)), so that a_sym (sigma/nu + kappa_bar)^nu = a rho"""
        return self.a * (self.A * self.gamma) ** (-1. / (self.gamma - 1.))

    @property
    def damping_rate(self):
        return 0. if np.isinf(self.tau) else 1. / self.tau

    @property
    def background_weight(self):
        return self.kappa_bar ** self.nu

    def replace(self, **changes):
        return replace(self, **changes)


def check_density(rho, quantity='rho'):
    floor = vacuum_floor()
    minimum = float(np.min(rho))
    if not minimum > floor:
        raise AdmissibilityError(quantity, minimum, floor)


def shifted_sound_speed(sigma, eos):
    """sigma/nu + kappa_bar, which is the sound speed of the corresponding density"""
    base = sigma / eos.nu + eos.kappa_bar
    check_density(base, 'sigma/nu + kappa_bar')
    return base


def pressure_values(rho, eos):
    check_density(rho)
    return eos.A * rho ** eos.gamma


def sound_speed_values(rho, eos):
    check_density(rho)
    return np.sqrt(eos.A * eos.gamma) * rho ** ((eos.gamma - 1.) / 2.)


def sigma_from_rho_values(rho, eos):
    return eos.nu * (sound_speed_values(rho, eos) - eos.kappa_bar)


def rho_from_sigma_values(sigma, eos):
    base = shifted_sound_speed(sigma, eos)
    return (base ** 2 / (eos.A * eos.gamma)) ** (1. / (eos.gamma - 1.))


def alignment_weight_values(sigma, eos):
    return shifted_sound_speed(sigma, eos) ** eos.nu


def pressure(rho, eos):
    return ScalarField(rho.grid, pressure_values(rho.values, eos))


def sound_speed(rho, eos):
    return ScalarField(rho.grid, sound_speed_values(rho.values, eos))


def sound_speed_from_sigma(sigma, eos):
    return ScalarField(sigma.grid, shifted_sound_speed(sigma.values, eos))


def sigma_from_rho(rho, eos):
    return ScalarField(rho.grid, sigma_from_rho_values(rho.values, eos))


def rho_from_sigma(sigma, eos):
    """
    Inverse of ``sigma_from_rho``: rho = ((sigma/nu + kappa_bar)^2 / (A gamma))^(1/(gamma-1)).

    :raises AdmissibilityError: sigma/nu + kappa_bar is not above the vacuum floor somewhere
    """
    return ScalarField(sigma.grid, rho_from_sigma_values(sigma.values, eos))


def alignment_weight(sigma, eos):
    """(sigma/nu + kappa_bar)^nu, the density weight of the symmetrized alignment integral"""
    return ScalarField(sigma.grid, alignment_weight_values(sigma.values, eos))


def inverse_form_discrepancy(sigma, eos):
    """
    Largest relative difference between the two closed forms of the inverse transform,
    ((sigma/nu + kappa_bar)^2 / gamma)^(1/(gamma-1)) and gamma^(-1/(gamma-1)) (sigma/nu + kappa_bar)^nu,
    which coincide when A = 1.
    """
    if eos.A != 1.:
        raise EosError(f'the power form of the inverse transform only holds for A = 1, got A = {eos.A}')
    general = rho_from_sigma_values(sigma.values, eos)
    power = eos.gamma ** (-1. / (eos.gamma - 1.)) * alignment_weight_values(sigma.values, eos)
    return float(np.max(np.abs(general - power) / np.abs(general)))
