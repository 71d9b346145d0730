"""
Successive approximations for the symmetrized system: each iterate solves a linear hyperbolic system whose
coefficients are frozen at the previous iterate, started from the same initial data.

By default the (k+1)-th iterate samples the coefficients of the k-th one at its Runge-Kutta stage times by
linear interpolation between time slices. With ``coefficients='stages'`` it takes the stage states the k-th
iterate actually visited instead, which makes the discrete fixed point exactly the nonlinear SSP-RK3 solution
on the same time mesh; the zeroth iterate carries no stage data and is always interpolated.
"""
from dataclasses import dataclass, field, replace
import logging
import numpy as np

from .diagnostics import default_sobolev_order
from .dynamics import step_ssprk3
from .eos_transform import shifted_sound_speed
from .exceptions import ConfigError, DiagnosticsError
from .grid_field import (ScalarField, VectorField, advective_derivative, divergence, gradient, inner, lp_norm,
                         sobolev_norm_sq)
from .kernel import alignment_force_values
from .rhs import rhs_symmetrized
from .state import Formulation, SimState, Tendency

logger = logging.getLogger(__name__)

STEP_TOLERANCE = 1e-9
ROUNDOFF_FLOOR = 1e-13
COEFFICIENT_SOURCES = ('interpolated', 'stages')


@dataclass(frozen=True)
class PicardConfig:
    """
    :param T0: iteration horizon
    :param dt: fixed time step, which must divide ``T0``
    :param K: number of iterations after the zeroth one
    :param M_bound: threshold of the uniform H^s bound monitor; ``None`` uses
        (||sigma0||^2_Hs + ||u0||^2_Hs + 1)^(1/2)
    :param auto_tune: halve ``T0`` until the measured contraction ratio reaches ``target_ratio``
    :param coefficients: ``interpolated`` (previous iterate interpolated linearly at stage times) or
        ``stages`` (previous iterate's own stage states)
    """
    T0: float = 0.5
    dt: float = 0.01
    K: int = 8
    M_bound: float = None
    auto_tune: bool = True
    target_ratio: float = 0.5
    dealias: bool = True
    sobolev_s: int = None
    coefficients: str = 'interpolated'

    def __post_init__(self):
        errors = []
        if not self.T0 >= 0.:
            errors.append(f'T0 must be nonnegative, got {self.T0}')
        if not self.dt > 0.:
            errors.append(f'dt must be positive, got {self.dt}')
        elif abs(round(self.T0 / self.dt) * self.dt - self.T0) > STEP_TOLERANCE * max(self.T0, self.dt):
            errors.append(f'dt = {self.dt:g} does not divide T0 = {self.T0:g}')
        if int(self.K) != self.K or self.K < 2:
            errors.append(f'K must be an integer of at least 2, got {self.K}')
        if self.M_bound is not None and not self.M_bound > 0.:
            errors.append(f'M_bound must be positive, got {self.M_bound}')
        if not 0. < self.target_ratio < 1.:
            errors.append(f'target_ratio must lie in (0, 1), got {self.target_ratio}')
        if self.coefficients not in COEFFICIENT_SOURCES:
            errors.append(f'coefficients must be one of {COEFFICIENT_SOURCES}, got {self.coefficients!r}')
        if errors:
            raise ConfigError(errors)

    @property
    def steps(self):
        return int(round(self.T0 / self.dt))

    def with_steps(self, steps):
        return replace(self, T0=steps * self.dt)


@dataclass
class IterateTrajectory:
    """
    States of one iterate on the time mesh t_n = n dt, n = 0..N, plus for every step the three states its
    right-hand side was evaluated at.
    """
    states: list
    iterate_index: int
    stages: list = None
    sup_hs_norm: float = 0.
    bound_exceeded: bool = False

    @property
    def times(self):
        return np.array([s.time for s in self.states])

    def coefficient(self, step, stage, time, source='interpolated'):
        if source == 'stages' and self.stages is not None:
            return self.stages[step][stage]
        return self.interpolate(time)

    def interpolate(self, time):
        times = self.times
        n = int(np.clip(np.searchsorted(times, time, side='right') - 1, 0, len(times) - 1))
        if n == len(times) - 1 or time <= times[n]:
            return self.states[n]
        theta = (time - times[n]) / (times[n + 1] - times[n])
        left, right = self.states[n], self.states[n + 1]
        return SimState.from_arrays(
            Formulation.SYMMETRIZED, left.grid,
            (1. - theta) * left.density_like.values + theta * right.density_like.values,
            (1. - theta) * left.velocity.components + theta * right.velocity.components, time)


def _initial_state(init):
    if isinstance(init, SimState):
        if init.is_primitive:
            raise ConfigError(['the Picard iteration works on symmetrized (sigma, u) data'])
        return SimState(Formulation.SYMMETRIZED, init.density_like, init.velocity, 0.)
    sigma, u = init
    return SimState(Formulation.SYMMETRIZED, sigma, u, 0.)


def hs_norm_sum(state, sobolev_s):
    return np.sqrt(sobolev_norm_sq(state.density_like, sobolev_s)) + np.sqrt(sobolev_norm_sq(state.velocity,
                                                                                             sobolev_s))


def default_bound(init, sobolev_s):
    state = _initial_state(init)
    return float(np.sqrt(sobolev_norm_sq(state.density_like, sobolev_s) + sobolev_norm_sq(state.velocity, sobolev_s)
                         + 1.))


def picard_zeroth(init, cfg):
    """the zeroth approximation, equal to the initial data at every time slice"""
    state = _initial_state(init)
    states = [SimState(Formulation.SYMMETRIZED, state.density_like, state.velocity, n * cfg.dt)
              for n in range(cfg.steps + 1)]
    return IterateTrajectory(states=states, iterate_index=0)


def linear_rhs(state, coefficient, eos, kernel, monitor=None):
    """
    Tendency of the linear system with coefficients (sigma^k, u^k) frozen at ``coefficient``:

    d sigma/dt = -kappa_bar div u - u^k . grad sigma - (sigma^k/nu) div u
    du/dt = -kappa_bar grad sigma - u/tau - (u^k . grad) u - (sigma^k/nu) grad sigma
            - a_sym integral Gamma(x - y) (u^k(x) - u^k(y)) (sigma^k(y)/nu + kappa_bar)^nu dy
    """
    grid = state.grid
    sigma = state.density_like.values
    u = state.velocity.components
    sigma_k = coefficient.density_like.values
    u_k = coefficient.velocity.components
    weight = shifted_sound_speed(sigma_k, eos) ** eos.nu
    div_u = divergence(u, grid)
    grad_sigma = gradient(sigma, grid)
    dsigma = -eos.kappa_bar * div_u - np.sum(u_k * grad_sigma, axis=0) - sigma_k / eos.nu * div_u
    du = (-eos.kappa_bar * grad_sigma - eos.damping_rate * u - advective_derivative(u_k, u, grid)
          - sigma_k / eos.nu * grad_sigma + alignment_force_values(kernel, u_k, weight, eos.a_sym, monitor))
    return Tendency(dsigma, du)


class _FrozenCoefficientRhs:
    """
    Right-hand side handed to the stepper. Stage calls arrive in a fixed order (start of step, first stage,
    second stage), which is how the matching coefficient of the previous iterate is found.
    """
    stage_offsets = (0., 1., 0.5)

    def __init__(self, previous, eos, kernel, dt, source='interpolated'):
        self.previous = previous
        self.eos = eos
        self.kernel = kernel
        self.dt = dt
        self.source = source
        self.step = 0
        self.calls = []
        self.stages = []

    def __call__(self, state):
        stage = len(self.calls)
        time = (self.step + self.stage_offsets[stage]) * self.dt
        coefficient = self.previous.coefficient(self.step, stage, time, self.source)
        self.calls.append(state)
        return linear_rhs(state, coefficient, self.eos, self.kernel)

    def finish_step(self):
        self.stages.append(tuple(self.calls))
        self.calls = []
        self.step += 1


def picard_iterate(prev, init, eos, kernel, cfg):
    """
    Solves the linear system with coefficients frozen at ``prev`` over [0, T0] from ``init``.

    A sup-in-time H^s norm above ``M_bound`` is logged as a warning and flagged on the result, not raised.
    """
    state = _initial_state(init)
    sobolev_s = cfg.sobolev_s or default_sobolev_order(state.grid.dim)
    bound = cfg.M_bound or default_bound(state, sobolev_s)
    rhs = _FrozenCoefficientRhs(prev, eos, kernel, cfg.dt, cfg.coefficients)
    states = [state]
    for n in range(cfg.steps):
        state = step_ssprk3(state, cfg.dt, rhs, dealias=cfg.dealias, step=n + 1)
        state = SimState(Formulation.SYMMETRIZED, state.density_like, state.velocity, (n + 1) * cfg.dt)
        rhs.finish_step()
        states.append(state)
    sup_norm = max(hs_norm_sum(s, sobolev_s) for s in states)
    iterate = IterateTrajectory(states=states, iterate_index=prev.iterate_index + 1, stages=rhs.stages,
                                sup_hs_norm=float(sup_norm), bound_exceeded=sup_norm > bound)
    if iterate.bound_exceeded:
        logger.warning(f'Iterate {iterate.iterate_index}: sup_t (||sigma||_Hs + ||u||_Hs) = {sup_norm:.6g} exceeds '
                       f'M = {bound:.6g}')
    return iterate


def l2_distance(first, second):
    """sup over the shared time mesh of ||sigma1 - sigma2||_L2 + ||u1 - u2||_L2"""
    return max(lp_norm(ScalarField(a.grid, a.density_like.values - b.density_like.values), 2)
               + lp_norm(VectorField(a.grid, a.velocity.components - b.velocity.components), 2)
               for a, b in zip(first, second))


@dataclass
class ContractionReport:
    """
    ``differences[k]`` is sup_t of the L^2 distance between iterates k+1 and k; ``ratios[k]`` is
    differences[k+1] / differences[k], reported as 0 once a difference sits at the round-off floor.
    """
    differences: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    contracting: bool = True
    non_contraction_at: int = None
    bound_exceeded: bool = False
    floor: float = 0.

    @property
    def partial_sums(self):
        return np.cumsum(self.differences)

    def max_ratio(self, start=2):
        tail = self.ratios[start:]
        return max(tail) if tail else 0.


def contraction_report(iterates):
    scale = max(max(lp_norm(s.density_like, 2) + lp_norm(s.velocity, 2) for s in it.states) for it in iterates)
    floor = ROUNDOFF_FLOOR * scale
    report = ContractionReport(floor=floor, bound_exceeded=any(it.bound_exceeded for it in iterates))
    report.differences = [l2_distance(newer.states, older.states) for older, newer in zip(iterates, iterates[1:])]
    for k in range(len(report.differences) - 1):
        previous, current = report.differences[k], report.differences[k + 1]
        report.ratios.append(0. if previous <= floor or current <= floor else current / previous)
    for k in range(1, len(report.ratios)):
        if report.ratios[k - 1] > 1. and report.ratios[k] > 1.:
            report.contracting = False
            report.non_contraction_at = k
            logger.warning(f'Picard iteration does not contract: d_{k + 1}/d_{k} = {report.ratios[k]:.4g} after '
                           f'{report.ratios[k - 1]:.4g}; T0 is likely too large')
            break
    return report


def picard_run(init, eos, kernel, cfg):
    """
    Runs the zeroth approximation and ``cfg.K`` iterations.

    :return: (list of ``IterateTrajectory``, ``ContractionReport``)
    """
    iterates = [picard_zeroth(init, cfg)]
    for k in range(cfg.K):
        iterates.append(picard_iterate(iterates[-1], init, eos, kernel, cfg))
    report = contraction_report(iterates)
    logger.info(f'Picard run over T0 = {cfg.T0:g} ({cfg.steps} steps), K = {cfg.K}: differences '
                + ', '.join(f'{d:.3g}' for d in report.differences))
    return iterates, report


def tune_horizon(init, eos, kernel, cfg):
    """
    Halves the number of steps (so T0 shrinks at fixed dt) until every ratio d_{k+1}/d_k with k >= 2 is at most
    ``cfg.target_ratio``, or a single step is left.

    :return: (tuned config, iterates, report) of the accepted horizon
    """
    steps = max(cfg.steps, 1)
    while True:
        trial = cfg.with_steps(steps)
        iterates, report = picard_run(init, eos, kernel, trial)
        if (report.contracting and report.max_ratio() <= cfg.target_ratio) or steps == 1:
            break
        logger.info(f'T0 = {trial.T0:g} gives contraction ratio {report.max_ratio():.4g}; halving')
        steps //= 2
    logger.info(f'Accepted T0 = {trial.T0:g}')
    return trial, iterates, report


def nonlinear_reference(init, eos, kernel, cfg):
    """the nonlinear symmetrized solution on the same time mesh as the iterates"""
    state = _initial_state(init)
    states = [state]
    for n in range(cfg.steps):
        state = step_ssprk3(state, cfg.dt, lambda s: rhs_symmetrized(s, eos, kernel), dealias=cfg.dealias,
                            step=n + 1)
        state = SimState(Formulation.SYMMETRIZED, state.density_like, state.velocity, (n + 1) * cfg.dt)
        states.append(state)
    return states


@dataclass
class EnergyBalance:
    """per-slice terms of the energy identity; ``lhs`` is ``rate + damping``"""
    lhs: np.ndarray
    rate: np.ndarray
    damping: np.ndarray
    transport: np.ndarray
    coupling: np.ndarray
    alignment: np.ndarray
    relative_residual: float


def linear_energy_terms(iterate, prev, eos, kernel):
    """
    Both sides of the energy identity of one iterate,
    (1/2) d/dt (||sigma||^2 + ||u||^2) + (1/tau) ||u||^2 = I1 + I2 + I3, at every time slice:
    I1 the transport by u^k, I2 the coupling through sigma^k/nu and I3 the frozen alignment forcing.

    The time derivative is a second-order finite difference over the iterate's slices (centred inside,
    one-sided at both ends), so the residual carries an O(dt^2) discretization error.

    :raises DiagnosticsError: the iterate has fewer than three time slices
    """
    if len(iterate.states) < 3:
        raise DiagnosticsError(f'the energy identity needs at least three time slices, got {len(iterate.states)}')
    energy = np.array([0.5 * (inner(s.density_like, s.density_like) + inner(s.velocity, s.velocity))
                       for s in iterate.states])
    rate = np.gradient(energy, iterate.times, edge_order=2)
    damping, transport, coupling, alignment = [], [], [], []
    for n, state in enumerate(iterate.states):
        coefficient = prev.states[n]
        grid = state.grid
        sigma, u = state.density_like, state.velocity
        sigma_k, u_k = coefficient.density_like.values, coefficient.velocity.components
        damping.append(eos.damping_rate * inner(u, u))
        grad_sigma = gradient(sigma.values, grid)
        div_u = divergence(u.components, grid)
        transport.append(-np.sum(sigma.values * np.sum(u_k * grad_sigma, axis=0)) * grid.cell_volume
                         - np.sum(u.components * advective_derivative(u_k, u.components, grid)) * grid.cell_volume)
        coupling.append(-np.sum(sigma.values * sigma_k * div_u + np.sum(u.components * grad_sigma, axis=0) * sigma_k)
                        * grid.cell_volume / eos.nu)
        weight = shifted_sound_speed(sigma_k, eos) ** eos.nu
        alignment.append(np.sum(u.components * alignment_force_values(kernel, u_k, weight, eos.a_sym))
                         * grid.cell_volume)
    damping, transport, coupling, alignment = map(np.array, (damping, transport, coupling, alignment))
    lhs = rate + damping
    measured = transport + coupling + alignment
    # measured against the size of the terms, since the rate and the damping power nearly cancel
    terms = np.abs(rate) + damping + np.abs(transport) + np.abs(coupling) + np.abs(alignment)
    scale = max(float(np.max(terms)), np.finfo(float).tiny)
    return EnergyBalance(lhs=lhs, rate=rate, damping=damping, transport=transport, coupling=coupling, alignment=alignment,
                         relative_residual=float(np.max(np.abs(lhs - measured)) / scale))
