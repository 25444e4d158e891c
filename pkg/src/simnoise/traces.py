"""Columnar trace files.

A trace file is comma-separated text with one header row, then either a
single acceleration column (the sample rate is supplied by the caller) or a
time column followed by an acceleration column. Accelerations are m/s^2 and
positive values point up.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import ParameterError, TraceParseError
from .signal_model import Signal

SPACING_TOLERANCE = 1e-4
TIME_HEADER = "time_s"
ACCEL_HEADER = "acceleration_mps2"


def _parse_float(cell, path, line):
    try:
        value = float(cell)
    except ValueError:
        raise TraceParseError(f"non-numeric cell {cell.strip()!r}", path, line) from None
    if not math.isfinite(value):
        raise TraceParseError(f"non-finite value {cell.strip()!r}", path, line)
    return value


def _rate_from_times(times, path, first_line):
    if times.size < 2:
        raise TraceParseError("need at least two timestamps to infer a sample rate", path)
    dt = np.diff(times)
    step = float(np.median(dt))
    if step <= 0:
        raise TraceParseError("timestamps are not increasing", path)
    bad = np.flatnonzero(np.abs(dt - step) > SPACING_TOLERANCE * step)
    if bad.size:
        row = int(bad[0]) + 1
        raise TraceParseError(
            f"non-uniform timestamp spacing: step {dt[bad[0]]!r} s, expected {step!r} s",
            path,
            first_line + row,
        )
    span = float(times[-1] - times[0])
    # round away float residue so traces of one trial set compare equal
    return float(f"{(times.size - 1) / span:.9g}")


def load_traces(path, sample_rate_hz=None):
    """Read a trace file into a Signal.

    Two-column files give their own rate from the timestamps, which must be
    uniform to one part in 10^4. Single-column files need ``sample_rate_hz``.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise TraceParseError("file is empty", path)
    header = [h.strip() for h in rows[0]]
    body = [(i + 2, r) for i, r in enumerate(rows[1:]) if any(c.strip() for c in r)]
    if not body:
        raise TraceParseError("no data rows after the header", path)
    ncol = len(header)
    if ncol not in (1, 2):
        raise TraceParseError(f"expected 1 or 2 columns, header has {ncol}", path, 1)

    values = np.empty((len(body), ncol))
    for j, (line, row) in enumerate(body):
        if len(row) != ncol:
            raise TraceParseError(f"expected {ncol} cells, got {len(row)}", path, line)
        for c in range(ncol):
            values[j, c] = _parse_float(row[c], path, line)

    if ncol == 1:
        if sample_rate_hz is None:
            raise ParameterError(f"{path}: single-column trace needs a declared sample rate")
        return Signal(values[:, 0], sample_rate_hz)

    rate = _rate_from_times(values[:, 0], path, body[0][0])
    if sample_rate_hz is not None and abs(rate - sample_rate_hz) > SPACING_TOLERANCE * sample_rate_hz:
        raise TraceParseError(f"timestamps imply {rate} Hz but {sample_rate_hz} Hz was declared", path)
    return Signal(values[:, 1], rate)


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_trace(signal, with_time=True):
    lines = [f"{TIME_HEADER},{ACCEL_HEADER}" if with_time else ACCEL_HEADER]
    fs = signal.sample_rate_hz
    for k, v in enumerate(signal.samples):
        lines.append(f"{k / fs!r},{float(v)!r}" if with_time else repr(float(v)))
    return "\n".join(lines) + "\n"


def write_trace(path, signal, with_time=True):
    atomic_write_text(path, format_trace(signal, with_time))
