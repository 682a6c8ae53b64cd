"""CSV output: header row, a config-hash comment, reals at 12 significant digits."""

from __future__ import annotations

import csv
import io
from fractions import Fraction


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if x is None:
        return ""
    return str(x)


def render_csv(header, rows, config_hash: str | None = None) -> str:
    buf = io.StringIO()
    if config_hash is not None:
        buf.write(f"# config_hash={config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()
