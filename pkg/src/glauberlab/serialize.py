"""CSV/JSON emit helpers.

All floats are written with 17 significant digits so that every value
round-trips bit-exactly through its decimal representation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence


def fmt17(x: float) -> str:
    """Decimal representation with 17 significant digits (bit-exact round trip)."""
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return format(x, ".17g")


def _cell(x: Any) -> str:
    if isinstance(x, float):
        return fmt17(x)
    return str(x)


def write_csv(dest, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write rows to a path or a file-like object, one header row."""
    if hasattr(dest, "write"):
        w = csv.writer(dest)
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])
    else:
        with open(dest, "w", newline="") as fh:
            write_csv(fh, header, rows)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def read_csv_columns(src) -> dict[str, list[str]]:
    """Parse a one-header CSV back into raw string columns."""
    if hasattr(src, "read"):
        rows = list(csv.reader(src))
    else:
        with open(src, newline="") as fh:
            rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: [row[i] for row in body] for i, name in enumerate(header)}


def json_text(obj: Any) -> str:
    """JSON dump; float repr is the shortest round-tripping decimal."""
    return json.dumps(obj, indent=2, sort_keys=False)


def dump_json(dest, obj: Any) -> None:
    if hasattr(dest, "write"):
        dest.write(json_text(obj))
    else:
        with open(dest, "w") as fh:
            fh.write(json_text(obj))
