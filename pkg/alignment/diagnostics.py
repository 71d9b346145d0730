"""
Energy functionals, dissipation audits, the composite Lyapunov functional, the global-existence threshold
and parameter sweeps across it.

All energies are evaluated in the symmetrized variables (sigma, u); primitive states are converted first.
"""
from dataclasses import dataclass, field, astuple
import logging
import traceback
import numpy as np

from .eos_transform import EosParams
from .exceptions import BetaTooLargeError, DiagnosticsError
from .grid_field import (ScalarField, VectorField, cross_term, gradient, divergence, inner, lp_norm,
                         sobolev_inner, sobolev_norm_sq)
from .kernel import alignment_force_values, kernel_l1_norm
from .rhs import rhs_symmetrized
from .state import density_values, to_symmetrized

logger = logging.getLogger(__name__)

SERIES_COLUMNS = ('time', 'e_l2', 'e_hs', 'u_diss', 'grad_sigma_diss', 'cross', 'lyapunov', 'mass', 'max_grad_u',
                  'young_ok', 'threshold_margin')
CAUCHY_SCHWARZ_SLACK = 1e-12
NONINCREASING_SLACK = 1e-10


def default_sobolev_order(dim):
    """smallest integer above dim/2 + 1"""
    return dim // 2 + 2


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    e_l2: float
    e_hs: float
    u_diss: float
    grad_sigma_diss: float
    cross: float
    lyapunov: float
    mass: float
    max_grad_u: float
    young_ok: bool
    threshold_margin: float

    def as_row(self):
        return astuple(self)


def threshold_margin(eos, kernel, convention='spectral'):
    """
    1/tau - 2 a_sym kappa_bar^nu ||Gamma||_L1; positive when damping dominates the alignment
    self-acceleration and small solutions exist globally.

    :param convention: matrix norm inside ||Gamma||_L1, ``spectral`` or ``max_entry``
    """
    l1_norm = kernel.l1_norm if convention == 'spectral' else kernel_l1_norm(kernel, convention)
    return eos.damping_rate - 2. * eos.a_sym * eos.background_weight * l1_norm


def _symmetrized_fields(state, eos):
    state = to_symmetrized(state, eos)
    return state.density_like, state.velocity


def energy_report(state, eos, kernel, sobolev_s, beta=0., young_ok=True, margin=None):
    """
    Evaluates every energy functional of one state.

    :param sobolev_s: order s of the high-order energy, at least 1
    :param beta: weight of the cross term in the Lyapunov functional
    :param young_ok: Young monitor outcome for the step that produced the state
    :raises DiagnosticsError: the cross term breaks its Cauchy-Schwarz bound
    """
    if sobolev_s < 1:
        raise DiagnosticsError(f'sobolev_s must be at least 1, got {sobolev_s}')
    sigma, u = _symmetrized_fields(state, eos)
    grid = sigma.grid
    u_hs = sobolev_norm_sq(u, sobolev_s)
    e_hs = sobolev_norm_sq(sigma, sobolev_s) + u_hs
    cross = cross_term(u, sigma, sobolev_s)
    if abs(cross) > 0.5 * e_hs * (1. + CAUCHY_SCHWARZ_SLACK) + 1e-300:
        raise DiagnosticsError(f'cross term {cross:.6g} exceeds half the H^s energy {e_hs:.6g} at t = {state.time}')
    jacobian = np.array([gradient(c, grid) for c in u.components])
    return DiagnosticsRecord(
        time=float(state.time),
        e_l2=sobolev_norm_sq(sigma, 0) + sobolev_norm_sq(u, 0),
        e_hs=e_hs,
        u_diss=u_hs,
        grad_sigma_diss=sobolev_norm_sq(sigma, sobolev_s, start=1),
        cross=cross,
        lyapunov=e_hs + beta * cross,
        mass=float(np.sum(density_values(state, eos)) * grid.cell_volume),
        max_grad_u=float(np.max(np.sqrt(np.sum(jacobian ** 2, axis=(0, 1))))),
        young_ok=bool(young_ok),
        threshold_margin=threshold_margin(eos, kernel) if margin is None else margin,
    )


@dataclass
class AuditReport:
    """
    Per-state series of the dissipation audit and the empirical constants extracted from them.

    ``remainder`` is what is left of (1/2) d e_l2/dt + (1/tau) ||u||^2 once the linear alignment power is
    removed; its ratio to ||u||^2 + ||grad sigma||^2 is the empirical constant ``c_delta``, which scales
    linearly with the data amplitude.
    """
    times: np.ndarray
    e_l2: np.ndarray
    e_l2_rate: np.ndarray
    e_l2_rate_fd: np.ndarray
    l2_margin_residual: np.ndarray
    remainder: np.ndarray
    c_delta: float
    hs_remainder: np.ndarray
    c_delta_hs: float
    cross_remainder: np.ndarray
    c_delta_cross: float
    rate_discrepancy: float
    l2_nonincreasing: bool


def _sup_ratio(numerator, denominator):
    positive = denominator > 0.
    if not positive.any():
        return 0.
    return float(np.max(np.abs(numerator[positive]) / denominator[positive]))


def dissipation_audit(trajectory, eos, kernel, sobolev_s):
    """
    Measures both sides of the L^2, high-order and cross-term dissipation inequalities along a trajectory.

    Rates come from the exact semi-discrete tendency; the centred finite-difference rate of e_l2 (one-sided at
    the ends) is kept alongside, and the largest gap between the two is reported as ``rate_discrepancy``.

    :raises DiagnosticsError: fewer than two states
    """
    if len(trajectory) < 2:
        raise DiagnosticsError(f'dissipation audit needs at least 2 states, got {len(trajectory)}')
    margin = threshold_margin(eos, kernel)
    background = eos.background_weight * np.ones(trajectory.states[0].grid.shape)
    series = {name: [] for name in ('e_l2', 'rate', 'u_l2', 'gs_l2', 'linear_power', 'hs_rate', 'u_hs', 'gs_hs',
                                    'linear_power_hs', 'cross_rate', 'linear_cross')}
    for state in trajectory:
        symmetrized = to_symmetrized(state, eos)
        sigma, u = symmetrized.density_like, symmetrized.velocity
        grid = sigma.grid
        tendency = rhs_symmetrized(symmetrized, eos, kernel)
        sigma_t, u_t = ScalarField(grid, tendency.density), VectorField(grid, tendency.velocity)
        linear_force = VectorField(grid, alignment_force_values(kernel, u.components, background, eos.a_sym))
        div_u = ScalarField(grid, divergence(u.components, grid))
        series['e_l2'].append(inner(sigma, sigma) + inner(u, u))
        series['rate'].append(2. * (inner(sigma, sigma_t) + inner(u, u_t)))
        series['u_l2'].append(inner(u, u))
        series['gs_l2'].append(sobolev_norm_sq(sigma, 1, start=1))
        series['linear_power'].append(inner(u, linear_force))
        series['hs_rate'].append(2. * (sobolev_inner(sigma, sigma_t, sobolev_s) + sobolev_inner(u, u_t, sobolev_s)))
        series['u_hs'].append(sobolev_norm_sq(u, sobolev_s))
        series['gs_hs'].append(sobolev_norm_sq(sigma, sobolev_s, start=1))
        series['linear_power_hs'].append(sobolev_inner(u, linear_force, sobolev_s))
        series['cross_rate'].append(cross_term(u_t, sigma, sobolev_s) + cross_term(u, sigma_t, sobolev_s))
        cross = cross_term(u, sigma, sobolev_s)
        series['linear_cross'].append(-eos.kappa_bar * series['gs_hs'][-1] - eos.damping_rate * cross
                                      + cross_term(linear_force, sigma, sobolev_s)
                                      + eos.kappa_bar * sobolev_norm_sq(div_u, sobolev_s - 1))
    series = {name: np.array(values) for name, values in series.items()}
    times = trajectory.times
    rate_fd = np.gradient(series['e_l2'], times)
    remainder = 0.5 * series['rate'] + eos.damping_rate * series['u_l2'] - series['linear_power']
    hs_remainder = 0.5 * series['hs_rate'] + eos.damping_rate * series['u_hs'] - series['linear_power_hs']
    cross_remainder = series['cross_rate'] - series['linear_cross']
    report = AuditReport(
        times=times,
        e_l2=series['e_l2'],
        e_l2_rate=series['rate'],
        e_l2_rate_fd=rate_fd,
        l2_margin_residual=0.5 * rate_fd + margin * series['u_l2'],
        remainder=remainder,
        c_delta=_sup_ratio(remainder, series['u_l2'] + series['gs_l2']),
        hs_remainder=hs_remainder,
        c_delta_hs=_sup_ratio(hs_remainder, series['u_hs'] + series['gs_hs']),
        cross_remainder=cross_remainder,
        c_delta_cross=_sup_ratio(cross_remainder, series['u_hs'] + series['gs_hs']),
        rate_discrepancy=float(np.max(np.abs(rate_fd - series['rate']))),
        l2_nonincreasing=bool(np.all(np.diff(series['e_l2']) <= NONINCREASING_SLACK)),
    )
    logger.info(f'Dissipation audit over {len(trajectory)} states: c_delta = {report.c_delta:.6g}, '
                f'high-order {report.c_delta_hs:.6g}, cross {report.c_delta_cross:.6g}')
    return report


@dataclass
class LyapunovSeries:
    times: np.ndarray
    values: np.ndarray
    ratios: np.ndarray
    nonincreasing: bool
    within_band: bool


def lyapunov_series(trajectory, eos, kernel, sobolev_s, beta):
    """
    L(t) = e_hs + beta cross along the trajectory, with the equivalence ratios L / e_hs.

    :raises BetaTooLargeError: |beta cross| > e_hs / 2 somewhere, so L is no longer equivalent to the energy
    """
    e_hs, cross = [], []
    for state in trajectory:
        sigma, u = _symmetrized_fields(state, eos)
        e_hs.append(sobolev_norm_sq(sigma, sobolev_s) + sobolev_norm_sq(u, sobolev_s))
        cross.append(cross_term(u, sigma, sobolev_s))
    e_hs, cross = np.array(e_hs), np.array(cross)
    if np.any(np.abs(beta * cross) > 0.5 * e_hs):
        nonzero = cross != 0.
        raise BetaTooLargeError(beta, float(np.min(0.5 * e_hs[nonzero] / np.abs(cross[nonzero]))))
    values = e_hs + beta * cross
    ratios = np.ones_like(values)
    positive = e_hs > 0.
    ratios[positive] = values[positive] / e_hs[positive]
    return LyapunovSeries(times=trajectory.times, values=values, ratios=ratios,
                          nonincreasing=bool(np.all(np.diff(values) <= NONINCREASING_SLACK)),
                          within_band=bool(np.all((ratios >= 0.5) & (ratios <= 1.5))))


SWEEP_PARAMETERS = ('a', 'a_sym', 'tau')
SWEEP_COLUMNS = ('param', 'value', 'threshold_margin', 'margin_max_entry', 'u_ratio', 'decay_rate',
                 'energy_amplification', 'classification', 'blowup', 'status', 'message')


@dataclass
class SweepRow:
    param: str
    value: float
    threshold_margin: float
    margin_max_entry: float
    u_ratio: float = np.nan
    decay_rate: float = np.nan
    energy_amplification: float = np.nan
    classification: str = 'failed'
    blowup: bool = False
    status: str = ''
    message: str = ''
    result: object = field(default=None, repr=False)

    def as_row(self):
        return tuple(getattr(self, name) for name in SWEEP_COLUMNS)


def eos_for(eos, param, value):
    """copy of ``eos`` with one swept parameter changed"""
    if param == 'a':
        return eos.replace(a=value)
    if param == 'tau':
        return eos.replace(tau=value)
    if param == 'a_sym':
        return EosParams.with_symmetrized_alignment(value, A=eos.A, gamma=eos.gamma, rho_bar=eos.rho_bar,
                                                    tau=eos.tau)
    raise DiagnosticsError(f'cannot sweep {param!r}; choose one of {SWEEP_PARAMETERS}')


def velocity_decay(result):
    """(||u(T)|| / ||u(0)||, fitted exponential decay rate of ||u||_L2) for a finished run"""
    times = result.trajectory.times
    norms = np.array([lp_norm(state.velocity, 2) for state in result.trajectory])
    if norms[0] == 0.:
        return 0., np.nan
    ratio = float(norms[-1] / norms[0])
    usable = norms > 0.
    if usable.sum() < 2:
        return ratio, np.nan
    slope, _ = np.polyfit(times[usable], np.log(norms[usable]), 1)
    return ratio, float(-slope)


def classify(row, result):
    """fills the outcome columns of a sweep row from a run result"""
    row.status = result.status
    row.message = result.message
    row.result = result
    row.blowup = result.status == 'blowup'
    e_hs = np.array([record.e_hs for record in result.records])
    if e_hs[0] > 0.:
        row.energy_amplification = float(np.max(e_hs) / e_hs[0])
    if result.status == 'blowup':
        row.classification = 'blowup'
    elif result.status != 'completed':
        row.classification = 'failed'
    else:
        row.u_ratio, row.decay_rate = velocity_decay(result)
        row.classification = 'decay' if row.u_ratio < 1. else 'growth'
    return row


def sweep(eos, kernel, param, values, runner):
    """
    Runs one simulation per parameter value and classifies its outcome as decay, growth, blowup or failed.
    A run that raises is recorded as a failed row, never propagated.

    :param param: ``a``, ``a_sym`` or ``tau``
    :param values: monotone list of parameter values
    :param runner: callable taking the swept ``EosParams`` and the parameter value, returning a ``RunResult``
    :return: rows sorted by threshold margin
    """
    if param not in SWEEP_PARAMETERS:
        raise DiagnosticsError(f'cannot sweep {param!r}; choose one of {SWEEP_PARAMETERS}')
    values = [float(v) for v in values]
    steps = np.diff(values)
    if len(values) > 1 and not (np.all(steps > 0.) or np.all(steps < 0.)):
        raise DiagnosticsError(f'sweep values must be monotone, got {values}')
    rows = []
    for value in values:
        swept = eos_for(eos, param, value)
        row = SweepRow(param, value, threshold_margin(swept, kernel), threshold_margin(swept, kernel, 'max_entry'))
        try:
            classify(row, runner(swept, value))
        except Exception as e:
            logger.error(''.join(traceback.format_exception(e)))
            row.status = 'error'
            row.message = str(e)
        logger.info(f'Sweep {param} = {value:g}: margin {row.threshold_margin:.6g}, {row.classification}')
        rows.append(row)
    return sorted(rows, key=lambda row: row.threshold_margin)
