"""CSV ingestion and emission.

Dialect: comma-separated, '.' decimal, mandatory header row, UTF-8, '\n'
newlines.  Floats are written with repr() so write -> read -> write is a
byte-identical fixpoint and outputs are deterministic.  Physical columns
may carry a unit suffix in the header (e.g. "pump_mW"); values are
converted to SI on ingestion per the unit policy.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .units import UnitError, parse_quantity


class TableError(ValueError):
    """Header mismatch or unparseable cell."""


@dataclass(frozen=True)
class Column:
    """One schema column: output field name, quantity kind, allowed values.

    kind None means free text; "count" means nonnegative real; any other
    kind is resolved through units.parse_quantity, with the header suffix
    (after the last '_') selecting the unit when present.
    """

    name: str
    kind: str = None
    choices: tuple = None


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple


EFFICIENCY_CURVE = TableSchema("efficiency-curve", (
    Column("pump", kind="power"),
    Column("eta", kind="dimensionless"),
))

COUNTS = TableSchema("counts", (
    Column("phase_setting", choices=("0", "pi/2", "pi", "3pi/2")),
    Column("bin", choices=("e", "l", "ll")),
    Column("counts", kind="count"),
))

SEGMENT_PEAKS = TableSchema("segment-peaks", (
    Column("segment", kind="count"),
    Column("peak", kind="dimensionless"),
))

NOISE_POINTS = TableSchema("noise-points", (
    Column("pump", kind="power"),
    Column("flux", kind="dimensionless"),
))

SPECTRUM = TableSchema("spectrum", (
    Column("wavelength", kind="length"),
    Column("efficiency", kind="dimensionless"),
))


_SUFFIX_UNITS = {
    "power": {"W": "W", "mW": "mW", "uW": "uW"},
    "length": {"m": "m", "mm": "mm", "um": "um", "nm": "nm", "cm": "cm"},
}


def _match_header(header, schema):
    """Map header tokens to (column, converter); raises on mismatch."""
    if len(header) != len(schema.columns):
        raise TableError(
            f"{schema.name}: expected {len(schema.columns)} columns "
            f"{[c.name for c in schema.columns]}, found header {header}"
        )
    converters = []
    for token, col in zip(header, schema.columns):
        token = token.strip()
        unit = None
        if token != col.name:
            stem, _, suffix = token.rpartition("_")
            known = _SUFFIX_UNITS.get(col.kind, {})
            if stem == col.name and suffix in known:
                unit = known[suffix]
            else:
                raise TableError(
                    f"{schema.name}: header column {token!r} does not match "
                    f"schema column {col.name!r}"
                )
        converters.append((col, unit))
    return converters


def _convert_cell(text, col, unit, row_num):
    where = f"row {row_num}, column {col.name!r}"
    text = text.strip()
    if col.choices is not None:
        if text not in col.choices:
            raise TableError(f"{where}: {text!r} not one of {col.choices}")
        return text
    if col.kind is None:
        return text
    if col.kind == "count":
        try:
            value = float(text)
        except ValueError as exc:
            raise TableError(f"{where}: unparseable number {text!r}") from exc
        if value < 0:
            raise TableError(f"{where}: counts must be nonnegative, got {text}")
        return value
    try:
        if unit is not None:
            return parse_quantity(f"{text} {unit}", col.kind)
        return parse_quantity(float(text), col.kind) if col.kind == "dimensionless" \
            else parse_quantity(text, col.kind)
    except (UnitError, ValueError) as exc:
        raise TableError(f"{where}: {exc}") from exc


def ingest_csv(path, schema):
    """Typed rows (list of dicts) from a CSV file matching `schema`."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableError(f"{schema.name}: {path} is empty, header required")
        converters = _match_header(header, schema)
        rows = []
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(converters):
                raise TableError(
                    f"{schema.name}: row {row_num} has {len(row)} cells, "
                    f"expected {len(converters)}"
                )
            rows.append({
                col.name: _convert_cell(cell, col, unit, row_num)
                for cell, (col, unit) in zip(row, converters)
            })
    return rows


def format_cell(value):
    # plain-float repr round-trips exactly; numpy scalars must be unwrapped
    # first (their repr is not parseable)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows):
    """Deterministic CSV emission (repr floats, '\n' newlines, UTF-8)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
