class SimulationError(Exception):
    """Base class for every error raised by the alignment simulator."""


class GridError(SimulationError, ValueError):
    pass


class UnsupportedNormError(SimulationError, ValueError):
    pass


class KernelError(SimulationError, ValueError):
    pass


class AdmissibilityError(SimulationError):
    """
    Raised when a density-like field leaves the admissible set (vacuum). The step is aborted rather than
    clamped, so the positivity invariant is never silently restored.

    :param quantity: name of the checked quantity, e.g. ``rho`` or ``sigma/nu + kappa_bar``
    :param minimum: smallest value found
    :param floor: admissibility floor the value was compared with
    """

    def __init__(self, quantity, minimum, floor):
        self.quantity = quantity
        self.minimum = minimum
        self.floor = floor
        super().__init__(f'{quantity} reached {minimum:.6g} (floor {floor:.1e}): vacuum state')


class NonFiniteError(SimulationError):

    def __init__(self, step=None, message='non-finite values in state'):
        self.step = step
        super().__init__(message if step is None else f'{message} at step {step:d}')


class DiagnosticsError(SimulationError, ValueError):
    pass


class BetaTooLargeError(DiagnosticsError):

    def __init__(self, beta, beta_max):
        self.beta = beta
        self.beta_max = beta_max
        super().__init__(f'beta = {beta:g} breaks the equivalence band |beta*cross| <= e_hs/2 along the '
                         f'trajectory; shrink beta below {beta_max:.6g}')


class ConfigError(SimulationError):
    """Carries every validation message found in a run configuration, not just the first one."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__('invalid configuration:\n' + '\n'.join(f' - {e}' for e in self.errors))


class SnapshotFormatError(SimulationError):
    pass


class EosError(SimulationError, ValueError):
    pass


class OutputError(SimulationError):
    """An output file could not be written or read; the message names the path."""
