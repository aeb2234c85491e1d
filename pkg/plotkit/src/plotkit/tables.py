"""Parser for the '#'-headered delimited tables the simulator writes.

Format: ``# key = value`` metadata lines, one row of space-separated column
names, then numeric rows.  This is plotkit's half of the file contract; it
is deliberately independent of the producer's implementation.
"""

from __future__ import annotations

import numpy as np


class PlotkitError(Exception):
    """Base class for plotkit failures."""


class SchemaError(PlotkitError):
    """An input table is missing required columns or metadata."""


def read_table(path):
    """Parse one table into (meta: dict[str, str], columns: dict[str, ndarray])."""
    meta = {}
    names = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if names is None:
                names = line.split()
                continue
            values = line.split()
            if len(values) != len(names):
                raise SchemaError(f"{path}: row width {len(values)} != {len(names)} columns")
            rows.append([float(tok) for tok in values])
    if names is None:
        raise SchemaError(f"{path}: no column header row found")
    data = np.array(rows, dtype=float) if rows else np.zeros((0, len(names)))
    return meta, {name: data[:, k] for k, name in enumerate(names)}


def require_columns(path, columns: dict, needed) -> None:
    missing = [name for name in needed if name not in columns]
    if missing:
        raise SchemaError(
            f"{path}: missing columns {missing}; found {sorted(columns)}; "
            f"expected at least {list(needed)}"
        )
