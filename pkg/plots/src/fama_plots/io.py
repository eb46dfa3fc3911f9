"""CSV table loading with named schema diagnostics.

Tables are small (at most a few thousand rows), so everything is read
eagerly into one numpy array per column.  Numeric columns become float
arrays; anything else stays as a string array.
"""

import csv
import os

import numpy as np

__all__ = ["SchemaError", "Table", "load_table"]


class SchemaError(ValueError):
    """Input CSV does not satisfy the documented schema."""


class Table:
    """Column-oriented view of one result CSV."""

    def __init__(self, path: str, columns: dict):
        self.path = path
        self.columns = columns

    def __len__(self):
        first = next(iter(self.columns.values()))
        return len(first)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def rows_where(self, **match):
        """Boolean mask of rows whose named columns equal the given values."""
        mask = np.ones(len(self), dtype=bool)
        for name, value in match.items():
            mask &= self.columns[name] == value
        return mask


def _coerce(values):
    try:
        return np.array([float(v) for v in values])
    except ValueError:
        return np.array(values, dtype=object)


def load_table(path: str, required) -> Table:
    """Read a CSV and check that every required column is present.

    Raises SchemaError naming the offending file and column or condition.
    """
    name = os.path.basename(path)
    if not os.path.exists(path):
        raise SchemaError(f"{name}: input CSV not found at {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{name}: empty CSV, no header row") from None
        rows = list(reader)
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{name}: missing column {missing[0]!r} "
                          f"(required: {', '.join(required)})")
    if not rows:
        raise SchemaError(f"{name}: no data rows")
    bad = next((i for i, row in enumerate(rows, start=2)
                if len(row) != len(header)), None)
    if bad is not None:
        raise SchemaError(f"{name}: row at line {bad} has "
                          f"{len(rows[bad - 2])} fields, header has {len(header)}")
    by_name = {c: [row[i] for row in rows] for i, c in enumerate(header)}
    return Table(path, {c: _coerce(v) for c, v in by_name.items()})
