"""Comma-separated data files and ``key: value`` metadata files.

Floats are written with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_columns(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> Path:
    """Column-oriented variant for large arrays."""
    cols = []
    for c in columns:
        c = np.asarray(c)
        if c.dtype == np.bool_:
            cols.append(c.astype(np.int8).astype(str))
        elif np.issubdtype(c.dtype, np.floating):
            cols.append(np.char.mod("%.17g", c))
        else:
            cols.append(c.astype(str))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        if cols and len(cols[0]):
            lines = cols[0]
            for c in cols[1:]:
                lines = np.char.add(np.char.add(lines, ","), c)
            fh.write("\n".join(lines.tolist()))
            fh.write("\n")
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_kv(path: Path, items: Iterable[tuple[str, object]]) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in items:
            fh.write(f"{k}: {fmt(v)}\n")
    return path


def read_kv(path: Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            k, _, v = line.partition(":")
            out[k.strip()] = v.strip()
    return out
