"""Delimited-text tables with '#'-prefixed metadata headers.

One file per data product: a block of ``# key = value`` lines, one row of
column names, then whitespace-separated numeric rows.  The format is
diff-able, deterministic (floats printed with round-trip precision) and
trivially parsed back by :func:`read_table`, the plotting layer and any
spreadsheet.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

FORMAT_VERSION = "1"


def write_table(path, meta: dict, columns: dict) -> Path:
    """Write named columns plus metadata; returns the path written."""
    path = Path(path)
    names = list(columns.keys())
    arrays = [np.atleast_1d(np.asarray(columns[k])) for k in names]
    if not arrays:
        raise ValueError("need at least one column")
    length = len(arrays[0])
    for name, arr in zip(names, arrays):
        if arr.ndim != 1 or len(arr) != length:
            raise ValueError(f"column {name!r} is not a 1-D array of length {length}")
        if " " in name:
            raise ValueError(f"column name {name!r} must not contain spaces")
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# table-version = {FORMAT_VERSION}"]
    for key, value in meta.items():
        text = f"{value}"
        if "\n" in text:
            raise ValueError(f"metadata {key!r} must be single-line")
        lines.append(f"# {key} = {text}")
    lines.append(" ".join(names))
    for row in range(length):
        lines.append(" ".join(_fmt(arr[row]) for arr in arrays))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _fmt(x) -> str:
    if isinstance(x, (np.integer, int)):
        return str(int(x))
    return format(float(x), ".17g")


def read_table(path):
    """Parse a table file back into (meta, columns-of-float-arrays)."""
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
            rows.append([float(tok) for tok in line.split()])
    if names is None:
        raise ValueError(f"{path}: no column header found")
    data = np.array(rows, dtype=float) if rows else np.zeros((0, len(names)))
    if data.shape[1] != len(names):
        raise ValueError(f"{path}: row width does not match {len(names)} columns")
    return meta, {name: data[:, k] for k, name in enumerate(names)}


def popmap_to_columns(pop_map: np.ndarray) -> dict:
    """Flatten an N x N population map into (m, n, weight) long-format columns."""
    n = pop_map.shape[0]
    i, j = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    return {
        "m": i.ravel().astype(int),
        "n": j.ravel().astype(int),
        "weight": pop_map.ravel(),
    }
