from django import forms
import numpy as np

from .dynamics import SPATIAL_SCHEMES
from .eos_transform import MIN_GAMMA
from .grid_field import MAX_SOBOLEV_ORDER, MIN_POINTS, SUPPORTED_DIMS
from .kernel import KINDS, PROFILES
from .picard import COEFFICIENT_SOURCES


def _choices(values):
    return [(v, v) for v in values]


class SectionForm(forms.Form):
    """
    Validates one ``[section]`` of a run configuration. Keys that are absent take the values in ``defaults``;
    keys that the form does not declare are reported as errors.
    """
    section = ''
    defaults = {}

    def __init__(self, data, *args, **kwargs):
        self.raw_keys = set(data)
        super().__init__(data, *args, **kwargs)

    def clean(self):
        cleaned_data = super().clean()
        for key in sorted(self.raw_keys - set(self.fields)):
            self.add_error(None, f'unknown key {key!r}')
        for key, default in self.defaults.items():
            if cleaned_data.get(key) is None and key not in self.errors:
                cleaned_data[key] = default
        return cleaned_data

    def error_messages_list(self):
        messages = []
        for key, errors in self.errors.items():
            where = f'[{self.section}]' if key == '__all__' else f'[{self.section}] {key}'
            messages.extend(f'{where}: {e}' for e in errors)
        return messages


class GridForm(SectionForm):
    section = 'grid'
    defaults = {'dim': 1, 'length': 2. * np.pi}

    dim = forms.TypedChoiceField(choices=[(d, d) for d in SUPPORTED_DIMS], coerce=int, required=False,
                                 empty_value=None)
    length = forms.FloatField(required=False)
    points = forms.IntegerField(min_value=MIN_POINTS)

    def clean_length(self):
        length = self.cleaned_data['length']
        if length is not None and not length > 0.:
            raise forms.ValidationError('torus length must be positive')
        return length

    def clean_points(self):
        points = self.cleaned_data['points']
        if points & (points - 1):
            raise forms.ValidationError(f'{points} is not a power of two')
        return points


class ExtendedFloatField(forms.FloatField):
    """float field that also accepts ``inf``"""

    def to_python(self, value):
        if isinstance(value, str) and value.strip().lower() in ('inf', '+inf', 'infinity'):
            return np.inf
        return super().to_python(value)

    def validate(self, value):
        if value == np.inf:
            return
        super().validate(value)


class EosForm(SectionForm):
    section = 'eos'
    defaults = {'A': 1.}

    A = forms.FloatField(required=False)
    gamma = forms.FloatField()
    rho_bar = forms.FloatField()
    a = forms.FloatField(required=False, min_value=0.)
    a_sym = forms.FloatField(required=False, min_value=0.)
    tau = ExtendedFloatField(help_text='damping time, inf switches damping off')

    def clean_A(self):
        A = self.cleaned_data['A']
        if A is not None and not A > 0.:
            raise forms.ValidationError('A must be positive')
        return A

    def clean_gamma(self):
        gamma = self.cleaned_data['gamma']
        if not gamma >= MIN_GAMMA:
            raise forms.ValidationError(f'gamma must be > 1 (at least {MIN_GAMMA}); the isothermal case is excluded')
        return gamma

    def clean_rho_bar(self):
        rho_bar = self.cleaned_data['rho_bar']
        if not rho_bar > 0.:
            raise forms.ValidationError('rho_bar must be positive')
        return rho_bar

    def clean_tau(self):
        tau = self.cleaned_data['tau']
        if not tau > 0.:
            raise forms.ValidationError('tau must be positive (or inf)')
        return tau

    def clean(self):
        cleaned_data = super().clean()
        if (cleaned_data.get('a') is None) == (cleaned_data.get('a_sym') is None) and 'a' not in self.errors \
                and 'a_sym' not in self.errors:
            self.add_error(None, 'give exactly one of a and a_sym')
        return cleaned_data


class KernelForm(SectionForm):
    section = 'kernel'
    defaults = {'kind': 'isotropic', 'profile': 'top_hat', 'amplitude': 1.}

    kind = forms.ChoiceField(choices=_choices(KINDS), required=False)
    profile = forms.ChoiceField(choices=_choices(PROFILES), required=False)
    radius = forms.FloatField()
    amplitude = forms.FloatField(required=False, min_value=0.)
    rate = forms.FloatField(required=False)

    def clean_radius(self):
        radius = self.cleaned_data['radius']
        if not radius > 0.:
            raise forms.ValidationError('kernel radius must be positive')
        return radius

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('kind') == '':
            cleaned_data['kind'] = self.defaults['kind']
        if cleaned_data.get('profile') == '':
            cleaned_data['profile'] = self.defaults['profile']
        rate = cleaned_data.get('rate')
        if cleaned_data.get('profile') == 'exponential' and not (rate is not None and rate > 0.):
            self.add_error('rate', 'the exponential profile needs a positive rate')
        return cleaned_data


class SchemeForm(SectionForm):
    section = 'scheme'
    defaults = {'spatial': 'spectral', 'cfl': 0.4, 'dt_max': 1., 'snapshot_every': 1}

    spatial = forms.ChoiceField(choices=_choices(SPATIAL_SCHEMES), required=False)
    dealias = forms.NullBooleanField(required=False)
    cfl = forms.FloatField(required=False)
    dt_max = forms.FloatField(required=False)
    t_end = forms.FloatField(min_value=0.)
    snapshot_every = forms.IntegerField(required=False, min_value=1)
    blowup_factor = forms.FloatField(required=False)

    def clean_cfl(self):
        cfl = self.cleaned_data['cfl']
        if cfl is not None and not 0. < cfl <= 1.:
            raise forms.ValidationError('cfl must lie in (0, 1]')
        return cfl

    def clean_dt_max(self):
        dt_max = self.cleaned_data['dt_max']
        if dt_max is not None and not dt_max > 0.:
            raise forms.ValidationError('dt_max must be positive')
        return dt_max

    def clean_blowup_factor(self):
        factor = self.cleaned_data['blowup_factor']
        if factor is not None and not factor > 1.:
            raise forms.ValidationError('blowup_factor must exceed 1')
        return factor

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('spatial') == '':
            cleaned_data['spatial'] = self.defaults['spatial']
        if cleaned_data.get('dealias') is None:
            cleaned_data['dealias'] = cleaned_data.get('spatial') == 'spectral'
        elif cleaned_data['dealias'] and cleaned_data.get('spatial') == 'llf_fv':
            self.add_error('dealias', 'dealiasing only applies to the spectral scheme')
        return cleaned_data


class InitialForm(SectionForm):
    section = 'initial'
    defaults = {'formulation': 'symmetrized', 'k': 1, 'phase': 0.}

    formulation = forms.ChoiceField(choices=_choices(('symmetrized', 'primitive')), required=False)
    perturbation = forms.ChoiceField(choices=_choices(('single_mode', 'random_band')))
    k = forms.IntegerField(required=False, min_value=0)
    amplitude = forms.FloatField(required=False, min_value=0.)
    density_amplitude = forms.FloatField(required=False)
    velocity_amplitude = forms.FloatField(required=False)
    phase = forms.FloatField(required=False)
    kmin = forms.IntegerField(required=False, min_value=0)
    kmax = forms.IntegerField(required=False, min_value=1)
    seed = forms.IntegerField(required=False, min_value=0)

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('formulation') == '':
            cleaned_data['formulation'] = self.defaults['formulation']
        amplitude = cleaned_data.get('amplitude')
        for key in ('density_amplitude', 'velocity_amplitude'):
            if cleaned_data.get(key) is None:
                cleaned_data[key] = amplitude
        if cleaned_data.get('perturbation') == 'single_mode':
            if cleaned_data.get('density_amplitude') is None or cleaned_data.get('velocity_amplitude') is None:
                self.add_error(None, 'single_mode data needs amplitude (or density_amplitude and velocity_amplitude)')
        elif cleaned_data.get('perturbation') == 'random_band':
            for key in ('amplitude', 'kmin', 'kmax', 'seed'):
                if cleaned_data.get(key) is None and key not in self.errors:
                    self.add_error(key, f'random_band data needs {key}')
            kmin, kmax = cleaned_data.get('kmin'), cleaned_data.get('kmax')
            if kmin is not None and kmax is not None and kmin > kmax:
                self.add_error('kmax', 'kmax must not be below kmin')
        return cleaned_data


class OutputForm(SectionForm):
    section = 'output'
    defaults = {'series_filename': 'series.csv', 'snapshot_every': 0}

    directory = forms.CharField(required=False)
    series_filename = forms.CharField(required=False)
    snapshot_every = forms.IntegerField(required=False, min_value=0)

    def clean(self):
        cleaned_data = super().clean()
        for key in ('directory', 'series_filename'):
            if cleaned_data.get(key) == '':
                cleaned_data[key] = self.defaults.get(key)
        return cleaned_data


class DiagnosticsForm(SectionForm):
    section = 'diagnostics'
    defaults = {'beta': 0.}

    sobolev_s = forms.IntegerField(required=False, min_value=1, max_value=MAX_SOBOLEV_ORDER)
    beta = forms.FloatField(required=False, min_value=0.)


class PicardForm(SectionForm):
    section = 'picard'
    defaults = {'T0': 0.5, 'K': 8, 'auto_tune': True, 'target_ratio': 0.5, 'coefficients': 'interpolated'}

    T0 = forms.FloatField(required=False, min_value=0.)
    dt = forms.FloatField(required=False)
    K = forms.IntegerField(required=False, min_value=2)
    M_bound = forms.FloatField(required=False)
    auto_tune = forms.NullBooleanField(required=False)
    target_ratio = forms.FloatField(required=False)
    coefficients = forms.ChoiceField(choices=_choices(COEFFICIENT_SOURCES), required=False)

    def clean_dt(self):
        dt = self.cleaned_data['dt']
        if dt is not None and not dt > 0.:
            raise forms.ValidationError('dt must be positive')
        return dt

    def clean_M_bound(self):
        bound = self.cleaned_data['M_bound']
        if bound is not None and not bound > 0.:
            raise forms.ValidationError('M_bound must be positive')
        return bound

    def clean_target_ratio(self):
        ratio = self.cleaned_data['target_ratio']
        if ratio is not None and not 0. < ratio < 1.:
            raise forms.ValidationError('target_ratio must lie in (0, 1)')
        return ratio

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('coefficients') == '':
            cleaned_data['coefficients'] = self.defaults['coefficients']
        return cleaned_data


SECTION_FORMS = {
    'grid': GridForm,
    'eos': EosForm,
    'kernel': KernelForm,
    'scheme': SchemeForm,
    'initial': InitialForm,
    'output': OutputForm,
    'diagnostics': DiagnosticsForm,
    'picard': PicardForm,
}
REQUIRED_SECTIONS = ('grid', 'eos', 'kernel', 'scheme', 'initial')
