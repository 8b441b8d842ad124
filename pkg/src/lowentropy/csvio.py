"""CSV output with shortest round-trip numbers."""

from __future__ import annotations

import csv
import io
import math
import sys
from typing import Iterable, Sequence

import numpy as np

from .expr import format_real


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format_real(v)
    return str(v)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row has {len(row)} cells, header has {width}")
        w.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def emit_csv(header: Sequence[str], rows: Iterable[Sequence], path) -> None:
    """Write a rectangular table (header always present) to ``path``;
    ``"-"`` writes to standard output."""
    text = render_csv(header, rows)
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_csv(path) -> tuple:
    """Header and rows as strings."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
