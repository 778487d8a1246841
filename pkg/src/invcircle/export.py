"""CSV helpers shared by every writer.

Floats are written with 17 significant digits so values round-trip
exactly; every file starts with a ``#`` comment carrying the package
version and the configuration digest.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from . import __version__


def fmt(x) -> str:
    if isinstance(x, (bool,)):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if x is None:
        return ""
    return format(float(x), ".17g")


def comment_line(digest: str | None) -> str:
    return f"invcircle {__version__} config-sha256={digest or 'none'}"


def write_csv(path, header, rows, digest: str | None = None):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {comment_line(digest)}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[str | None, list[str], list[list[str]]]:
    """Returns ``(digest, header, rows)``; rows keep their string form."""
    digest = None
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            if "config-sha256=" in line:
                digest = line.split("config-sha256=", 1)[1].strip()
            continue
        body.append(line)
    reader = list(csv.reader(body))
    if not reader:
        return digest, [], []
    return digest, reader[0], [r for r in reader[1:] if r]


def parse_float(s: str) -> float:
    return float(s) if s != "" else math.nan
