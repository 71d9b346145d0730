"""
Run configuration files: a flat sectioned ``key = value`` grammar with ``#`` comments, validated section by
section through the forms in ``alignment.forms`` so that every problem is reported at once.
"""
import configparser
from dataclasses import dataclass, field
import logging
import math
import os
import numpy as np
from django.conf import settings

from .diagnostics import default_sobolev_order, threshold_margin
from .dynamics import SchemeConfig, cfl_dt
from .eos_transform import EosParams, rho_from_sigma_values
from .exceptions import ConfigError, SimulationError
from .forms import REQUIRED_SECTIONS, SECTION_FORMS
from .grid_field import make_grid
from .kernel import KernelSpec, build_kernel
from .picard import PicardConfig
from .state import Formulation, SimState

logger = logging.getLogger(__name__)


def default_output_root():
    return getattr(settings, 'ALIGNMENT', {}).get('OUTPUT_ROOT', 'output')


def default_blowup_factor():
    return getattr(settings, 'ALIGNMENT', {}).get('BLOWUP_FACTOR', 100.)


def _read_sections(text):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#',), comment_prefixes=('#',),
                                       default_section='__defaults__', strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError([f'cannot parse configuration: {e}'])
    return {name: dict(parser[name]) for name in parser.sections()}


@dataclass
class RunConfig:
    """
    Validated contents of one configuration file, one dict of cleaned values per section. The builders turn
    them into the objects the simulator works with.
    """
    grid_section: dict
    eos_section: dict
    kernel_section: dict
    scheme_section: dict
    initial_section: dict
    output_section: dict = field(default_factory=dict)
    diagnostics_section: dict = field(default_factory=dict)
    picard_section: dict = field(default_factory=dict)

    def grid(self):
        return make_grid(self.grid_section['dim'], self.grid_section['length'], self.grid_section['points'])

    def eos(self):
        section = self.eos_section
        if section.get('a_sym') is not None:
            return EosParams.with_symmetrized_alignment(section['a_sym'], A=section['A'], gamma=section['gamma'],
                                                        rho_bar=section['rho_bar'], tau=section['tau'])
        return EosParams(A=section['A'], gamma=section['gamma'], rho_bar=section['rho_bar'], a=section['a'],
                         tau=section['tau'])

    def kernel_spec(self):
        return KernelSpec(**{key: self.kernel_section.get(key) for key in ('kind', 'profile', 'radius', 'amplitude',
                                                                           'rate')})

    def kernel(self, grid=None):
        return build_kernel(self.kernel_spec(), grid or self.grid())

    def scheme(self):
        return SchemeConfig(**{key: self.scheme_section[key] for key in ('spatial', 'dealias', 'cfl', 'dt_max',
                                                                          't_end', 'snapshot_every',
                                                                          'blowup_factor')})

    @property
    def formulation(self):
        return Formulation(self.initial_section['formulation'])

    @property
    def sobolev_s(self):
        return self.diagnostics_section.get('sobolev_s') or default_sobolev_order(self.grid_section['dim'])

    @property
    def beta(self):
        return self.diagnostics_section.get('beta', 0.)

    @property
    def output_directory(self):
        return self.output_section.get('directory') or default_output_root()

    @property
    def series_filename(self):
        return self.output_section.get('series_filename') or 'series.csv'

    @property
    def snapshot_every(self):
        return self.output_section.get('snapshot_every', 0)

    def initial_state(self, grid=None, eos=None):
        """the configured initial data in the configured formulation"""
        grid = grid or self.grid()
        eos = eos or self.eos()
        sigma, u = initial_fields(grid, self.initial_section)
        if self.formulation is Formulation.PRIMITIVE:
            return SimState.from_arrays(Formulation.PRIMITIVE, grid, rho_from_sigma_values(sigma, eos), u)
        return SimState.from_arrays(Formulation.SYMMETRIZED, grid, sigma, u)

    def symmetrized_initial_state(self, grid=None):
        grid = grid or self.grid()
        sigma, u = initial_fields(grid, self.initial_section)
        return SimState.from_arrays(Formulation.SYMMETRIZED, grid, sigma, u)

    def picard_config(self, grid=None, eos=None):
        """
        Fixed-step Picard settings. Without an explicit ``dt`` the CFL step of the initial state is shrunk so an
        integer number of steps covers ``T0``.
        """
        section = {key: value for key, value in self.picard_section.items() if value is not None}
        T0 = section.get('T0', 0.5)
        dt = section.get('dt')
        if dt is None:
            grid = grid or self.grid()
            eos = eos or self.eos()
            dt = cfl_dt(self.symmetrized_initial_state(grid), eos, self.scheme())
            dt = T0 / max(math.ceil(T0 / dt), 1) if T0 > 0. else dt
        return PicardConfig(T0=T0, dt=dt, K=section.get('K', 8), M_bound=section.get('M_bound'),
                            auto_tune=section.get('auto_tune', True), target_ratio=section.get('target_ratio', 0.5),
                            dealias=self.scheme_section['dealias'], sobolev_s=self.sobolev_s,
                            coefficients=section.get('coefficients', 'interpolated'))

    def threshold_margin(self, grid=None):
        return threshold_margin(self.eos(), self.kernel(grid))

    def series_path(self):
        return os.path.join(self.output_directory, self.series_filename)


def single_mode_fields(grid, k, density_amplitude, velocity_amplitude, phase=0.):
    """
    sigma = d sin(2 pi k x_1 / L + phase), u = -v cos(2 pi k x_1 / L + phase) e_1
    """
    theta = 2. * np.pi * k * grid.coordinates[0] / grid.length + phase
    sigma = density_amplitude * np.sin(theta)
    u = np.zeros((grid.dim,) + grid.shape)
    u[0] = -velocity_amplitude * np.cos(theta)
    return sigma, u


def _band_wave_vectors(dim, kmin, kmax):
    ranges = [np.arange(-kmax, kmax + 1)] * dim
    vectors = np.array(np.meshgrid(*ranges, indexing='ij')).reshape(dim, -1).T
    magnitude = np.sqrt(np.sum(vectors ** 2, axis=1))
    keep = (magnitude > 0.) & (magnitude >= kmin) & (magnitude <= kmax)
    # one representative of every +-m pair: the leading nonzero entry is positive
    leading = np.array([v[np.flatnonzero(v)[0]] if np.any(v) else 0 for v in vectors])
    return vectors[keep & (leading > 0)]


def random_band_fields(grid, kmin, kmax, amplitude, seed):
    """
    Seeded superposition of cosines over integer wave vectors m with kmin <= |m| <= kmax, drawn independently
    for sigma and every velocity component, each scaled to sup norm ``amplitude``.
    """
    vectors = _band_wave_vectors(grid.dim, kmin, kmax)
    if not len(vectors):
        raise ConfigError([f'no integer wave vector has magnitude in [{kmin}, {kmax}]'])
    rng = np.random.default_rng(seed)
    phase_arg = 2. * np.pi * np.tensordot(vectors, grid.coordinates, axes=(1, 0)) / grid.length

    def draw():
        coefficients = rng.standard_normal(len(vectors))
        phases = rng.uniform(0., 2. * np.pi, len(vectors))
        values = np.tensordot(coefficients, np.cos(phase_arg + phases.reshape((-1,) + (1,) * grid.dim)), axes=1)
        return amplitude * values / np.max(np.abs(values))

    sigma = draw()
    u = np.array([draw() for _ in range(grid.dim)])
    return sigma, u


def initial_fields(grid, section):
    """(sigma, u) arrays of the configured perturbation of the background state"""
    if section['perturbation'] == 'single_mode':
        return single_mode_fields(grid, section['k'], section['density_amplitude'], section['velocity_amplitude'],
                                  section['phase'])
    return random_band_fields(grid, section['kmin'], section['kmax'], section['amplitude'], section['seed'])


def _cross_section_errors(cleaned):
    errors = []
    grid, kernel, scheme = cleaned.get('grid'), cleaned.get('kernel'), cleaned.get('scheme')
    initial, output = cleaned.get('initial'), cleaned.get('output')
    if grid and kernel and kernel['radius'] >= grid['length'] / 2.:
        errors.append(f'[kernel] radius: {kernel["radius"]:g} must be below half the torus length '
                      f'({grid["length"] / 2.:g})')
    if scheme and output and output['snapshot_every'] and output['snapshot_every'] % scheme['snapshot_every']:
        errors.append(f'[output] snapshot_every: {output["snapshot_every"]} is not a multiple of [scheme] '
                      f'snapshot_every = {scheme["snapshot_every"]}')
    if scheme and initial and scheme['spatial'] == 'llf_fv' and initial['formulation'] != 'primitive':
        errors.append('[initial] formulation: the llf_fv scheme works on the primitive formulation')
    return errors


def parse_config(text):
    """
    Parses and validates a run configuration.

    :param text: contents of the configuration file
    :return: ``RunConfig``
    :raises ConfigError: with every problem found, including unknown sections and keys
    """
    sections = _read_sections(text)
    errors = []
    for name in sorted(set(sections) - set(SECTION_FORMS)):
        errors.append(f'unknown section [{name}]')
    for name in REQUIRED_SECTIONS:
        if name not in sections:
            errors.append(f'missing section [{name}]')
    cleaned = {}
    for name, form_class in SECTION_FORMS.items():
        if name not in sections and name in REQUIRED_SECTIONS:
            continue
        form = form_class(sections.get(name, {}))
        if form.is_valid():
            cleaned[name] = form.cleaned_data
        else:
            errors.extend(form.error_messages_list())
    if cleaned.get('scheme') and cleaned['scheme'].get('blowup_factor') is None:
        cleaned['scheme']['blowup_factor'] = default_blowup_factor()
    errors.extend(_cross_section_errors(cleaned))
    if errors:
        raise ConfigError(errors)
    config = RunConfig(grid_section=cleaned['grid'], eos_section=cleaned['eos'], kernel_section=cleaned['kernel'],
                       scheme_section=cleaned['scheme'], initial_section=cleaned['initial'],
                       output_section=cleaned.get('output', {}), diagnostics_section=cleaned.get('diagnostics', {}),
                       picard_section=cleaned.get('picard', {}))
    try:
        config.eos()
        config.kernel_spec()
        config.scheme()
        margin = config.threshold_margin()
    except (ConfigError, SimulationError) as e:
        raise ConfigError(getattr(e, 'errors', [str(e)]))
    logger.info(f'Threshold margin 1/tau - 2 a_sym kappa_bar^nu ||Gamma||_L1 = {margin:.6g}')
    return config


def load_config(path):
    """reads and parses a configuration file, reporting I/O failures as configuration errors"""
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError([f'cannot read {path}: {e.strerror}'])
    return parse_config(text)
