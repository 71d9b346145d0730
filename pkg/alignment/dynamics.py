"""
Time integration of the Euler-alignment system: CFL control, the three-stage SSP Runge-Kutta step and the
simulation loop with early termination on vacuum, non-finite values or gradient blow-up.
"""
from dataclasses import dataclass, field
import logging
import numpy as np

from .diagnostics import default_sobolev_order, energy_report, threshold_margin
from .eos_transform import check_density
from .exceptions import AdmissibilityError, ConfigError, NonFiniteError
from .grid_field import dealias as dealias_values
from .kernel import YoungMonitor, alignment_force_values
from .rhs import RHS, rhs_primitive
from .state import SimState, Trajectory, check_admissible, wave_speed

logger = logging.getLogger(__name__)

SPATIAL_SCHEMES = ('spectral', 'llf_fv')
DEFAULT_BLOWUP_FACTOR = 100.
END_TIME_SLACK = 1e-12


@dataclass(frozen=True)
class SchemeConfig:
    """
    :param spatial: ``spectral`` (pseudo-spectral) or ``llf_fv`` (first-order finite volumes)
    :param dealias: apply the 2/3 rule after every stage; defaults to on for spectral, must be off for llf_fv
    :param cfl: Courant number in (0, 1]
    :param dt_max: upper bound on the time step
    :param t_end: final time
    :param snapshot_every: keep every this many steps in the trajectory
    :param blowup_factor: stop once max |grad u| exceeds this multiple of its initial value
    """
    spatial: str = 'spectral'
    dealias: bool = None
    cfl: float = 0.4
    dt_max: float = 1.
    t_end: float = 1.
    snapshot_every: int = 1
    blowup_factor: float = DEFAULT_BLOWUP_FACTOR

    def __post_init__(self):
        if self.dealias is None:
            object.__setattr__(self, 'dealias', self.spatial == 'spectral')
        errors = []
        if self.spatial not in SPATIAL_SCHEMES:
            errors.append(f'spatial scheme must be one of {SPATIAL_SCHEMES}, got {self.spatial!r}')
        if self.spatial == 'llf_fv' and self.dealias:
            errors.append('dealiasing only applies to the spectral scheme')
        if not 0. < self.cfl <= 1.:
            errors.append(f'cfl must lie in (0, 1], got {self.cfl}')
        if not self.dt_max > 0.:
            errors.append(f'dt_max must be positive, got {self.dt_max}')
        if not self.t_end >= 0.:
            errors.append(f't_end must be nonnegative, got {self.t_end}')
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 1:
            errors.append(f'snapshot_every must be a positive integer, got {self.snapshot_every}')
        if not self.blowup_factor > 1.:
            errors.append(f'blowup_factor must exceed 1, got {self.blowup_factor}')
        if errors:
            raise ConfigError(errors)


@dataclass
class RunResult:
    """
    Outcome of ``run``. ``status`` is one of ``completed``, ``vacuum``, ``nonfinite`` or ``blowup``; the early
    terminations carry the reason in ``message`` instead of raising.
    """
    status: str
    message: str
    trajectory: Trajectory
    records: list = field(default_factory=list)
    steps: int = 0
    young_checks: int = 0
    young_worst_ratio: float = 0.

    @property
    def completed(self):
        return self.status == 'completed'

    @property
    def young_ok(self):
        return all(record.young_ok for record in self.records)


def select_rhs(form, cfg):
    try:
        return RHS[(form.value, cfg.spatial)]
    except KeyError:
        raise ConfigError([f'the {cfg.spatial} scheme does not support the {form.value} formulation'])


def cfl_dt(state, eos, cfg):
    """
    dt = min(dt_max, cfl h / max(|u| + kappa)) with kappa the local sound speed of the state.

    :raises NonFiniteError: the maximal wave speed is not finite
    """
    u = state.velocity.components
    speed = float(np.max(np.sqrt(np.sum(u ** 2, axis=0)) + wave_speed(state, eos)))
    if not np.isfinite(speed):
        raise NonFiniteError(message='non-finite wave speed')
    return min(cfg.dt_max, cfg.cfl * state.grid.spacing / speed)


def _unknowns(state, conservative):
    rho = state.density_like.values
    u = state.velocity.components
    return rho, (rho * u if conservative else u)


def _state_from(template, density_like, second, conservative, time, step):
    if not (np.isfinite(density_like).all() and np.isfinite(second).all()):
        raise NonFiniteError(step)
    if conservative:
        check_density(density_like)
        second = second / density_like
    return SimState.from_arrays(template.form, template.grid, density_like, second, time)


def step_ssprk3(state, dt, rhs, dealias=False, step=None):
    """
    One step of the optimal three-stage, third-order strong-stability-preserving Runge-Kutta scheme
    (Shu-Osher form). When the tendency is conservative the stages are blended in (rho, rho u).

    :param rhs: callable mapping a ``SimState`` to its ``Tendency``
    :param dealias: project every stage onto the 2/3-rule modes
    :param step: index of the step, reported on non-finite values
    :raises NonFiniteError: a stage produced NaN or Inf
    """
    grid = state.grid
    t0 = state.time

    def advance(base, current, weight, time):
        tendency = rhs(current)
        conservative = tendency.conservative
        d0, v0 = _unknowns(base, conservative)
        d, v = _unknowns(current, conservative)
        d = (1. - weight) * d0 + weight * (d + dt * tendency.density)
        v = (1. - weight) * v0 + weight * (v + dt * tendency.velocity)
        if dealias:
            d, v = dealias_values(d, grid), dealias_values(v, grid)
        return _state_from(state, d, v, conservative, time, step)

    first = advance(state, state, 1., t0 + dt)
    second = advance(state, first, 0.25, t0 + 0.5 * dt)
    return advance(state, second, 2. / 3., t0 + dt)


def run(initial, eos, kernel, cfg, sobolev_s=None, beta=0., on_snapshot=None):
    """
    Integrates from ``initial`` to ``cfg.t_end``, recording diagnostics after every step and keeping every
    ``cfg.snapshot_every``-th state in the trajectory (the final state is always kept).

    :param on_snapshot: optional callable ``(step, state)`` invoked for every kept state
    :return: ``RunResult``; vacuum, non-finite values and gradient blow-up end the run early with a status
    """
    sobolev_s = sobolev_s or default_sobolev_order(initial.grid.dim)
    check_admissible(initial, eos)
    monitor = YoungMonitor(kernel)
    rhs_function = select_rhs(initial.form, cfg)

    def rhs(s):
        return rhs_function(s, eos, kernel, monitor)

    margin = threshold_margin(eos, kernel)
    trajectory = Trajectory()
    records = [energy_report(initial, eos, kernel, sobolev_s, beta=beta, margin=margin)]

    def keep(step, s):
        trajectory.append(s, step)
        if on_snapshot is not None:
            on_snapshot(step, s)

    keep(0, initial)
    initial_gradient = records[0].max_grad_u
    blowup_level = cfg.blowup_factor * initial_gradient
    logger.info(f'Starting {initial.form.value} {cfg.spatial} run to t = {cfg.t_end:g} on a {initial.grid.dim}D '
                f'grid with n = {initial.grid.points}; threshold margin {margin:.6g}')

    state, step, status, message = initial, 0, 'completed', ''
    while state.time < cfg.t_end * (1. - END_TIME_SLACK):
        violations = monitor.violations
        try:
            dt = min(cfl_dt(state, eos, cfg), cfg.t_end - state.time)
            state = step_ssprk3(state, dt, rhs, dealias=cfg.dealias, step=step + 1)
            check_admissible(state, eos)
        except AdmissibilityError as e:
            status, message = 'vacuum', f'step {step + 1}: {e}'
            break
        except NonFiniteError as e:
            status, message = 'nonfinite', str(e)
            break
        step += 1
        record = energy_report(state, eos, kernel, sobolev_s, beta=beta, young_ok=monitor.violations == violations,
                               margin=margin)
        records.append(record)
        if step % cfg.snapshot_every == 0:
            keep(step, state)
        if initial_gradient > 0. and record.max_grad_u > blowup_level:
            status = 'blowup'
            message = (f'max |grad u| = {record.max_grad_u:.6g} exceeded {cfg.blowup_factor:g} x its initial value '
                       f'at t = {state.time:.6g} (step {step})')
            break
    if trajectory.steps[-1] != step:
        keep(step, state)

    if status == 'completed':
        logger.info(f'Run completed after {step:d} steps at t = {state.time:.6g}')
    else:
        logger.warning(f'Run stopped early ({status}): {message}')
    return RunResult(status=status, message=message, trajectory=trajectory, records=records, steps=step,
                     young_checks=monitor.checks, young_worst_ratio=monitor.worst_ratio)


def alignment_momentum(state, eos, kernel):
    """
    integral of rho(x) a integral Gamma(x - y) (u(x) - u(y)) rho(y) dy dx per component; zero for an even,
    symmetric kernel
    """
    rho = state.density_like.values
    force = alignment_force_values(kernel, state.velocity.components, rho, eos.a)
    return np.sum(rho * force, axis=state.grid.axes) * state.grid.cell_volume


def momentum_budget_residual(state, eos, kernel):
    """
    Relative defect of d/dt integral rho u = -(1/tau) integral rho u + integral rho F_align for a primitive
    spectral state, scaled by integral |rho u|.
    """
    grid = state.grid
    rho = state.density_like.values
    u = state.velocity.components
    tendency = rhs_primitive(state, eos, kernel)
    rate = np.sum(tendency.density * u + rho * tendency.velocity, axis=grid.axes) * grid.cell_volume
    momentum = np.sum(rho * u, axis=grid.axes) * grid.cell_volume
    defect = rate + eos.damping_rate * momentum - alignment_momentum(state, eos, kernel)
    scale = max(float(np.sum(np.abs(rho * u)) * grid.cell_volume), np.finfo(float).tiny)
    return float(np.max(np.abs(defect)) / scale)
