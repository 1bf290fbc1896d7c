"""CSV ingestion and emission.

Schema::

    date,tmax_c,tmin_c,sunshine_h[,<extra>...][,gsr_mj_m2_day]

Dates are ISO ``YYYY-MM-DD``; ``\\r\\n`` line endings are accepted.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from pathlib import Path

from .records import CORE_FEATURES, TARGET, DataError, Dataset, MeteoRecord

HEADER_PREFIX = ("date",) + CORE_FEATURES


def _number(text: str, column: str, row: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"cannot parse {column}={text!r} as a number", row) from None
    if not math.isfinite(value):
        raise DataError(f"{column} is not finite", row)
    return value


def parse_csv(text: bytes | str, name: str = "dataset") -> Dataset:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError("empty file: header row missing") from None

    for i, col in enumerate(HEADER_PREFIX):
        if i >= len(header) or header[i] != col:
            raise DataError(f"missing column {col!r} (header was {','.join(header)})", 1)
    has_target = header[-1] == TARGET
    extras = header[len(HEADER_PREFIX) : len(header) - 1 if has_target else len(header)]
    if TARGET in extras:
        raise DataError(f"{TARGET} must be the last column", 1)
    if len(set(header)) != len(header):
        raise DataError("duplicate column names", 1)

    records = []
    for line_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise DataError(f"expected {len(header)} fields, got {len(row)}", line_no)
        try:
            date = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise DataError(f"bad date {row[0]!r}", line_no) from None
        tmax, tmin, sun = (_number(row[k + 1], CORE_FEATURES[k], line_no) for k in range(3))
        extra_vals = tuple(
            (col, _number(row[4 + k], col, line_no)) for k, col in enumerate(extras)
        )
        gsr = None
        if has_target and row[-1].strip():
            gsr = _number(row[-1], TARGET, line_no)
        try:
            records.append(MeteoRecord(date, tmax, tmin, sun, extra_vals, gsr))
        except DataError as exc:
            raise DataError(str(exc), line_no) from None
    try:
        return Dataset(tuple(records), name)
    except DataError as exc:
        raise DataError(str(exc)) from None


def emit_csv(ds: Dataset, include_target: bool | None = None) -> str:
    """Serialize with shortest round-trip float formatting (exact re-parse)."""
    if include_target is None:
        include_target = ds.has_target
    header = list(HEADER_PREFIX) + list(ds.extra_names)
    if include_target:
        header.append(TARGET)
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for r in ds.records:
        fields = [r.date.isoformat(), repr(r.tmax), repr(r.tmin), repr(r.sunshine)]
        fields += [repr(v) for _, v in r.extras]
        if include_target:
            fields.append("" if r.gsr is None else repr(r.gsr))
        out.write(",".join(fields) + "\n")
    return out.getvalue()


def read_csv(path: str | Path) -> Dataset:
    path = Path(path)
    return parse_csv(path.read_bytes(), name=path.stem)


def write_csv(ds: Dataset, path: str | Path) -> None:
    Path(path).write_text(emit_csv(ds), encoding="utf-8", newline="")
