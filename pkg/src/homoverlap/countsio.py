"""Counts CSV: ``period_index,delay_um,duration_s,coincidences``, UTF-8, LF line endings.

Rows at zero delay are dip periods, rows at the shoulder delay are
normalization periods. Any other delay is rejected.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .exceptions import CountsParseError, DomainError
from .mcsim import CountRecord, CountSeries

COLUMNS = ("period_index", "delay_um", "duration_s", "coincidences")
_DELAY_ATOL = 1e-9


def format_counts(series: CountSeries) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in [*series.dip, *series.shoulder]:
        writer.writerow([rec.period_index, repr(rec.delay_um), repr(rec.duration_s),
                         rec.coincidences])
    return buf.getvalue()


def emit_counts(series: CountSeries, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_counts(series))
    return path


def _parse_int(text, line, column):
    try:
        value = int(text)
    except ValueError:
        raise CountsParseError(f"expected an integer, got {text!r}", line, column) from None
    return value


def _parse_float(text, line, column):
    try:
        value = float(text)
    except ValueError:
        raise CountsParseError(f"expected a number, got {text!r}", line, column) from None
    if not math.isfinite(value):
        raise CountsParseError(f"non-finite value {text!r}", line, column)
    return value


def parse_counts(text, shoulder_delay_um=200.0, params=None) -> CountSeries:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise CountsParseError("empty file", 1) from None
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise CountsParseError(f"missing columns {missing}", 1)
    if tuple(header) != COLUMNS:
        raise CountsParseError(f"header must be {','.join(COLUMNS)}", 1)

    dip, shoulder = [], []
    for lineno, row in enumerate(reader, 2):
        if not row:
            continue
        if len(row) != len(COLUMNS):
            raise CountsParseError(f"expected {len(COLUMNS)} fields, got {len(row)}", lineno)
        period = _parse_int(row[0], lineno, "period_index")
        delay = _parse_float(row[1], lineno, "delay_um")
        duration = _parse_float(row[2], lineno, "duration_s")
        count = _parse_int(row[3], lineno, "coincidences")
        if duration <= 0:
            raise CountsParseError("duration_s must be > 0", lineno, "duration_s")
        if count < 0:
            raise CountsParseError("coincidences must be >= 0", lineno, "coincidences")
        try:
            rec = CountRecord(period, delay, duration, count)
        except DomainError as exc:
            raise CountsParseError(str(exc), lineno) from exc
        if abs(delay) <= _DELAY_ATOL:
            dip.append(rec)
        elif abs(delay - shoulder_delay_um) <= _DELAY_ATOL:
            shoulder.append(rec)
        else:
            raise CountsParseError(
                f"delay {delay!r} is neither 0 nor the shoulder delay {shoulder_delay_um!r}",
                lineno, "delay_um")
    if not dip:
        raise CountsParseError("no dip records")
    if not shoulder:
        raise CountsParseError("no shoulder records")
    return CountSeries(dip, shoulder, params)


def ingest_counts(path, shoulder_delay_um=200.0, params=None) -> CountSeries:
    """Read and validate a counts CSV file."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    try:
        return parse_counts(text, shoulder_delay_um, params)
    except CountsParseError as exc:
        wrapped = CountsParseError(f"{path}: {exc}")
        wrapped.line, wrapped.column = exc.line, exc.column
        raise wrapped from exc
