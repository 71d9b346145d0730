"""
File formats written by the simulator.

* Series CSV: header ``time,e_l2,e_hs,u_diss,grad_sigma_diss,cross,lyapunov,mass,max_grad_u,young_ok,
  threshold_margin``, one row per recorded step, floats with 17 significant digits, ``young_ok`` as
  ``True``/``False``.
* Snapshot: one text line ``EULERALIGN-SNAPSHOT v1 dim=<d> n=<n> L=<L> time=<t> form=<formulation>`` followed by
  little-endian float64 arrays, row-major: density_like (n^dim values), then each velocity component.
* Sweep and Picard summaries: CSV tables with the columns of ``SWEEP_COLUMNS`` and ``PICARD_COLUMNS``.
"""
import logging
import os
import numpy as np
from astropy.table import Table

from .diagnostics import SERIES_COLUMNS, SWEEP_COLUMNS
from .exceptions import OutputError, SnapshotFormatError
from .grid_field import make_grid
from .state import Formulation, SimState

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '{:.17g}'
SNAPSHOT_MAGIC = 'EULERALIGN-SNAPSHOT'
SNAPSHOT_VERSION = 'v1'
SNAPSHOT_DTYPE = np.dtype('<f8')
PICARD_COLUMNS = ('k', 'difference', 'ratio', 'partial_sum')


def _ensure_directory(path):
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise OutputError(f'cannot create directory {directory}: {e.strerror}')


def _write_table(table, path):
    for name in table.colnames:
        if table[name].dtype.kind == 'f':
            table[name].format = FLOAT_FORMAT
    _ensure_directory(path)
    try:
        table.write(path, format='ascii.csv', overwrite=True)
    except OSError as e:
        raise OutputError(f'cannot write {path}: {e.strerror}')
    logger.info(f'Wrote {len(table):d} rows to {path}')
    return path


def _read_table(path, columns):
    try:
        with open(path, encoding='utf-8') as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise OutputError(f'cannot read {path}: {e.strerror}')
    if not lines or tuple(lines[0].split(',')) != tuple(columns):
        raise OutputError(f'{path} does not start with the header {",".join(columns)}')
    if len(lines) == 1:
        return Table(names=columns)
    return Table.read(lines, format='ascii.csv', fast_reader=False)


def series_table(records):
    rows = [record.as_row() for record in records]
    dtypes = [bool if name == 'young_ok' else float for name in SERIES_COLUMNS]
    if not rows:
        return Table(names=SERIES_COLUMNS, dtype=dtypes)
    return Table(rows=rows, names=SERIES_COLUMNS, dtype=dtypes)


def write_series(records, path):
    """
    Writes the per-step diagnostics of a run. An empty record list gives a header-only file.

    :raises OutputError: the file or its directory cannot be written
    """
    return _write_table(series_table(records), path)


def read_series(path):
    return _read_table(path, SERIES_COLUMNS)


def write_sweep(rows, path):
    table = Table(rows=[row.as_row() for row in rows] or None, names=SWEEP_COLUMNS,
                  dtype=[str, float, float, float, float, float, float, str, bool, str, str])
    return _write_table(table, path)


def read_sweep(path):
    return _read_table(path, SWEEP_COLUMNS)


def write_picard(report, path):
    """one row per difference d_k between consecutive iterates, with d_k / d_(k-1) and the partial sums"""
    ratios = [np.nan] + list(report.ratios)
    rows = [(k + 1, d, ratios[k], s) for k, (d, s) in enumerate(zip(report.differences, report.partial_sums))]
    table = Table(rows=rows or None, names=PICARD_COLUMNS, dtype=[int, float, float, float])
    return _write_table(table, path)


def snapshot_header(state):
    grid = state.grid
    return (f'{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} dim={grid.dim:d} n={grid.points:d} L={grid.length:.17g} '
            f'time={state.time:.17g} form={state.form.value}')


def write_snapshot(state, path):
    """
    Writes one state: the text header line, then density_like and the velocity components as little-endian
    float64, row-major.

    :raises OutputError: the file cannot be written
    """
    payload = np.concatenate([state.density_like.values[None], state.velocity.components]).astype(SNAPSHOT_DTYPE)
    _ensure_directory(path)
    try:
        with open(path, 'wb') as f:
            f.write((snapshot_header(state) + '\n').encode('ascii'))
            f.write(payload.tobytes(order='C'))
    except OSError as e:
        raise OutputError(f'cannot write {path}: {e.strerror}')
    logger.debug(f'Wrote snapshot at t = {state.time:.6g} to {path}')
    return path


def _parse_header(line, path):
    tokens = line.split()
    if len(tokens) < 2 or tokens[0] != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(f'{path} is not a snapshot file')
    if tokens[1] != SNAPSHOT_VERSION:
        raise SnapshotFormatError(f'{path} has snapshot format {tokens[1]}, expected {SNAPSHOT_VERSION}')
    try:
        fields = dict(token.split('=', 1) for token in tokens[2:])
        return int(fields['dim']), int(fields['n']), float(fields['L']), float(fields['time']), fields['form']
    except (KeyError, ValueError) as e:
        raise SnapshotFormatError(f'{path} has a malformed header: {line!r} ({e})')


def read_snapshot(path):
    """
    :return: ``SimState`` rebuilt from the file
    :raises SnapshotFormatError: wrong magic or version, malformed header, or a payload whose length does not
        match dim and n
    """
    try:
        with open(path, 'rb') as f:
            line = f.readline().decode('ascii', errors='replace').rstrip('\n')
            payload = f.read()
    except OSError as e:
        raise OutputError(f'cannot read {path}: {e.strerror}')
    dim, n, length, time, form = _parse_header(line, path)
    try:
        grid = make_grid(dim, length, n)
        formulation = Formulation(form)
    except ValueError as e:
        raise SnapshotFormatError(f'{path} has an invalid header: {e}')
    expected = (1 + dim) * n ** dim * SNAPSHOT_DTYPE.itemsize
    if len(payload) != expected:
        raise SnapshotFormatError(f'{path} holds {len(payload):d} payload bytes; dim={dim} n={n} needs {expected:d}')
    values = np.frombuffer(payload, dtype=SNAPSHOT_DTYPE).astype(float).reshape((1 + dim,) + grid.shape)
    return SimState.from_arrays(formulation, grid, values[0], values[1:], time)


def snapshot_path(directory, step):
    return os.path.join(directory, 'snapshots', f'snapshot_{step:06d}.bin')
