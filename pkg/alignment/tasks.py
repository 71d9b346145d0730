import logging
import os
from django.conf import settings
import dramatiq

from .config import parse_config
from .diagnostics import classify, eos_for, SweepRow, threshold_margin
from .dynamics import run
from .output import snapshot_path, write_series, write_snapshot, write_sweep

logger = logging.getLogger(__name__)

SWEEP_ROW_FILENAME = 'row.csv'


def simulate_to_directory(config, directory, eos=None, grid=None, kernel=None):
    """
    Runs the configured simulation (optionally with other model constants) and writes its series file and
    snapshots under ``directory``.

    :return: ``RunResult``
    """
    grid = grid or config.grid()
    eos = eos or config.eos()
    kernel = kernel or config.kernel(grid)
    snapshot_every = config.snapshot_every

    def on_snapshot(step, state):
        if snapshot_every and step % snapshot_every == 0:
            write_snapshot(state, snapshot_path(directory, step))

    result = run(config.initial_state(grid, eos), eos, kernel, config.scheme(), sobolev_s=config.sobolev_s,
                 beta=config.beta, on_snapshot=on_snapshot)
    write_series(result.records, os.path.join(directory, config.series_filename))
    return result


def sweep_row_directory(root, param, value):
    return os.path.join(root, 'sweep', f'{param}_{value:.6g}')


@dramatiq.actor(queue_name=getattr(settings, 'ALIGNMENT', {}).get('SWEEP_QUEUE', 'default'))
def run_sweep_row(config_text, param, value, root):
    """runs one row of a parameter sweep out of process; writes the row's series file and its one-row table"""
    config = parse_config(config_text)
    grid = config.grid()
    eos = eos_for(config.eos(), param, value)
    kernel = config.kernel(grid)
    row = SweepRow(param, value, threshold_margin(eos, kernel), threshold_margin(eos, kernel, 'max_entry'))
    directory = sweep_row_directory(root, param, value)
    classify(row, simulate_to_directory(config, directory, eos=eos, grid=grid, kernel=kernel))
    write_sweep([row], os.path.join(directory, SWEEP_ROW_FILENAME))
    logger.info(f'Sweep row {param} = {value:g} in {directory}: margin {row.threshold_margin:.6g}, '
                f'{row.classification} ({row.status})')
