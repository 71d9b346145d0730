from django.core.management import call_command
from django.core.management.base import BaseCommand, CommandError
import logging
import os
import traceback

from alignment.config import load_config
from alignment.diagnostics import SWEEP_PARAMETERS, sweep, threshold_margin
from alignment.dynamics import cfl_dt
from alignment.exceptions import AdmissibilityError, ConfigError, NonFiniteError, SimulationError
from alignment.kernel import kernel_l1_norm
from alignment.output import write_picard, write_sweep
from alignment.picard import l2_distance, nonlinear_reference, picard_run, tune_horizon
from alignment.tasks import run_sweep_row, simulate_to_directory, sweep_row_directory

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('run', 'sweep', 'picard', 'check')
EXIT_SUCCESS = 0
EXIT_INVALID = 1
EXIT_ABORTED = 2


def parse_values(text):
    try:
        return [float(value) for value in text.split(',') if value.strip()]
    except ValueError:
        raise CommandError(f'--values must be a comma-separated list of numbers, got {text!r}',
                           returncode=EXIT_INVALID)


class Command(BaseCommand):

    help = 'Runs, sweeps, Picard-iterates or checks an Euler-alignment configuration file'

    def add_arguments(self, parser):
        parser.add_argument('subcommand', help=f'one of {", ".join(SUBCOMMANDS)}')
        parser.add_argument('config', help='path to the run configuration', nargs='?')
        parser.add_argument('--param', help='model constant swept by the sweep subcommand',
                            choices=SWEEP_PARAMETERS, default='a_sym')
        parser.add_argument('--values', help='comma-separated parameter values for the sweep subcommand',
                            default='')
        parser.add_argument('--output-dir', help='overrides the output directory of the configuration')
        parser.add_argument('--enqueue', help='dispatch sweep rows to the dramatiq workers instead of running them '
                                              'here', action='store_true')

    def handle(self, subcommand=None, config=None, param='a_sym', values='', output_dir=None, enqueue=False,
               **kwargs):
        if subcommand not in SUBCOMMANDS:
            self.stderr.write(self.create_parser('manage.py', 'simulate').format_usage())
            raise CommandError(f'unknown subcommand {subcommand!r}; choose one of {", ".join(SUBCOMMANDS)}',
                               returncode=EXIT_INVALID)
        if config is None:
            raise CommandError(f'the {subcommand} subcommand needs a configuration file', returncode=EXIT_INVALID)
        try:
            run_config = load_config(config)
        except ConfigError as e:
            raise CommandError(str(e), returncode=EXIT_INVALID)
        directory = output_dir or run_config.output_directory

        try:
            if subcommand == 'run':
                self.do_run(run_config, directory)
            elif subcommand == 'sweep':
                self.do_sweep(run_config, config, directory, param, parse_values(values), enqueue)
            elif subcommand == 'picard':
                self.do_picard(run_config, directory)
            else:
                self.do_check(run_config)
        except (AdmissibilityError, NonFiniteError) as e:
            raise CommandError(str(e), returncode=EXIT_ABORTED)
        except SimulationError as e:
            logger.error(''.join(traceback.format_exception(e)))
            raise CommandError(str(e), returncode=EXIT_INVALID)

    def do_run(self, run_config, directory):
        grid = run_config.grid()
        eos = run_config.eos()
        kernel = run_config.kernel(grid)
        self.stdout.write(f'threshold margin: {threshold_margin(eos, kernel):.6g}')
        result = simulate_to_directory(run_config, directory, eos=eos, grid=grid, kernel=kernel)
        self.stdout.write(f'{result.status} after {result.steps:d} steps at t = {result.trajectory.final.time:.6g}; '
                          f'series in {os.path.join(directory, run_config.series_filename)}')
        if not result.completed:
            raise CommandError(f'run aborted ({result.status}): {result.message}', returncode=EXIT_ABORTED)

    def do_sweep(self, run_config, config_path, directory, param, values, enqueue):
        if not values:
            raise CommandError('the sweep subcommand needs --values', returncode=EXIT_INVALID)
        if enqueue:
            with open(config_path, encoding='utf-8') as f:
                config_text = f.read()
            for value in values:
                message = run_sweep_row.send(config_text, param, value, directory)
                self.stdout.write(f'queued {param} = {value:g} as message {message.message_id}')
            return

        grid = run_config.grid()
        kernel = run_config.kernel(grid)

        def runner(eos, value):
            row_directory = sweep_row_directory(directory, param, value)
            return simulate_to_directory(run_config, row_directory, eos=eos, grid=grid, kernel=kernel)

        rows = sweep(run_config.eos(), kernel, param, values, runner)
        path = write_sweep(rows, os.path.join(directory, 'sweep.csv'))
        for row in rows:
            self.stdout.write(f'{param} = {row.value:<10g} margin {row.threshold_margin:<+12.6g} {row.classification}')
        self.stdout.write(f'sweep table in {path}')

    def do_picard(self, run_config, directory):
        grid = run_config.grid()
        eos = run_config.eos()
        kernel = run_config.kernel(grid)
        cfg = run_config.picard_config(grid, eos)
        init = run_config.symmetrized_initial_state(grid)
        if cfg.auto_tune:
            cfg, iterates, report = tune_horizon(init, eos, kernel, cfg)
        else:
            iterates, report = picard_run(init, eos, kernel, cfg)
        path = write_picard(report, os.path.join(directory, 'picard.csv'))
        reference = nonlinear_reference(init, eos, kernel, cfg)
        limit_distance = l2_distance(iterates[-1].states, reference)
        self.stdout.write(f'T0 = {cfg.T0:g} with dt = {cfg.dt:.6g}; max ratio (k >= 2) {report.max_ratio():.4g}; '
                          f'distance of the last iterate to the nonlinear solution {limit_distance:.4g}')
        self.stdout.write(f'contraction table in {path}')
        if report.bound_exceeded:
            self.stderr.write('the uniform H^s bound was exceeded by some iterate')
        if not report.contracting:
            raise CommandError(f'Picard iteration does not contract (at ratio {report.non_contraction_at}); '
                               f'reduce T0', returncode=EXIT_ABORTED)

    def do_check(self, run_config):
        grid = run_config.grid()
        eos = run_config.eos()
        kernel = run_config.kernel(grid)
        margin = threshold_margin(eos, kernel)
        initial = run_config.initial_state(grid, eos)
        self.stdout.write(f'threshold margin: {margin:.6g}')
        self.stdout.write(f'threshold margin (max-entry norm): {threshold_margin(eos, kernel, "max_entry"):.6g}')
        self.stdout.write(f'kernel L1 norm (spectral): {kernel_l1_norm(kernel):.6g}')
        self.stdout.write(f'kernel L1 norm (max entry): {kernel_l1_norm(kernel, "max_entry"):.6g}')
        self.stdout.write(f'a_sym = {eos.a_sym:.6g}, kappa_bar = {eos.kappa_bar:.6g}, nu = {eos.nu:.6g}')
        self.stdout.write(f'CFL time step of the initial state: {cfl_dt(initial, eos, run_config.scheme()):.6g}')
        if not margin > 0.:
            raise CommandError(f'threshold margin {margin:.6g} is not positive', returncode=EXIT_INVALID)


def cli(argv):
    """
    Runs ``simulate`` with command-line style arguments and returns its exit status instead of exiting.
    """
    try:
        call_command('simulate', *argv)
    except CommandError as e:
        logger.error(str(e))
        return e.returncode
    return EXIT_SUCCESS
