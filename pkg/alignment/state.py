"""
Value types shared by the time stepper, the Picard iteration and the diagnostics.
"""
from dataclasses import dataclass, field
from enum import Enum
import numpy as np

from .eos_transform import (check_density, shifted_sound_speed, sigma_from_rho_values, rho_from_sigma_values,
                            sound_speed_values)
from .grid_field import ScalarField, VectorField, same_grid


class Formulation(str, Enum):
    PRIMITIVE = 'primitive'
    SYMMETRIZED = 'symmetrized'


@dataclass(frozen=True, eq=False)
class SimState:
    """
    (rho, u) for the primitive formulation or (sigma, u) for the symmetrized one, at one instant.
    """
    form: Formulation
    density_like: ScalarField
    velocity: VectorField
    time: float = 0.

    def __post_init__(self):
        object.__setattr__(self, 'form', Formulation(self.form))
        same_grid(self.density_like, self.velocity)

    @classmethod
    def from_arrays(cls, form, grid, density_like, velocity, time=0.):
        return cls(form, ScalarField(grid, density_like), VectorField(grid, velocity), time)

    @property
    def grid(self):
        return self.density_like.grid

    @property
    def is_primitive(self):
        return self.form is Formulation.PRIMITIVE


@dataclass(frozen=True, eq=False)
class Tendency:
    """
    Time derivative of a state. With ``conservative`` set, ``velocity`` holds d(rho u)/dt instead of du/dt.
    """
    density: np.ndarray
    velocity: np.ndarray
    conservative: bool = False


@dataclass
class Trajectory:
    """time-ordered states of a run, each tagged with the step index that produced it"""
    states: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    def append(self, state, step):
        self.states.append(state)
        self.steps.append(step)

    @property
    def times(self):
        return np.array([s.time for s in self.states])

    @property
    def final(self):
        return self.states[-1]

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


def check_admissible(state, eos):
    """:raises AdmissibilityError: rho (primitive) or sigma/nu + kappa_bar (symmetrized) is not positive"""
    if state.is_primitive:
        check_density(state.density_like.values)
    else:
        shifted_sound_speed(state.density_like.values, eos)


def wave_speed(state, eos):
    """local sound speed kappa of the state"""
    if state.is_primitive:
        return sound_speed_values(state.density_like.values, eos)
    return shifted_sound_speed(state.density_like.values, eos)


def density_values(state, eos):
    if state.is_primitive:
        return state.density_like.values
    return rho_from_sigma_values(state.density_like.values, eos)


def sigma_values(state, eos):
    if state.is_primitive:
        return sigma_from_rho_values(state.density_like.values, eos)
    return state.density_like.values


def to_symmetrized(state, eos):
    if not state.is_primitive:
        return state
    return SimState(Formulation.SYMMETRIZED, ScalarField(state.grid, sigma_values(state, eos)), state.velocity,
                    state.time)


def to_primitive(state, eos):
    if state.is_primitive:
        return state
    return SimState(Formulation.PRIMITIVE, ScalarField(state.grid, density_values(state, eos)), state.velocity,
                    state.time)


def symmetrized_tendency(state, tendency, eos):
    """
    Maps a primitive (non-conservative) tendency to the symmetrized variables through the chain rule
    d sigma/dt = (kappa(rho)/rho) d rho/dt.
    """
    rho = state.density_like.values
    return Tendency(sound_speed_values(rho, eos) / rho * tendency.density, tendency.velocity)
