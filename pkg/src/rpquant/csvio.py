"""Point-set CSV files: one point per row, decimal floats, optional header line."""
from __future__ import annotations

import csv
import io

import numpy as np

from .errors import CorruptInput, EmptySet
from .geometry_stats import as_points


def parse_points(text: str, header: bool = False) -> np.ndarray:
    rows = []
    width = None
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if header and lineno == 1:
            continue
        if not row or all(not cell.strip() for cell in row):
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise CorruptInput(f"line {lineno}: expected {width} columns, got {len(row)}")
        try:
            rows.append([float(cell) for cell in row])
        except ValueError as exc:
            raise CorruptInput(f"line {lineno}: {exc}") from None
    if not rows:
        raise EmptySet("no points in input")
    return as_points(np.array(rows))


def read_points(path, header: bool = False) -> np.ndarray:
    with open(path, newline="") as fh:
        return parse_points(fh.read(), header=header)


def format_rows(rows) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return out.getvalue()


def write_points(path, X) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_rows(np.asarray(X, dtype=float)))
