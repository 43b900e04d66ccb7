"""
CSV and JSON output with atomic replacement.

Every file is written to a temporary sibling and renamed into place, so a
reader never sees a half-written file and an interrupted run leaves any
previous output untouched.
"""

import csv
import json
import math
import os
import tempfile

__all__ = ["format_value", "write_csv", "write_json", "read_csv"]


def format_value(v):
    """Decimal text; floats get 9 significant digits."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.9g}"
    if hasattr(v, "item"):  # numpy scalar
        return format_value(v.item())
    return str(v)


def _atomic_write(path, write):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows):
    """Write ``rows`` under a mandatory ``header``; returns the path."""
    header = list(header)

    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            row = list(row)
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
            w.writerow([format_value(v) for v in row])

    return _atomic_write(path, write)


def write_json(path, obj):
    def write(fh):
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return _atomic_write(path, write)


def read_csv(path):
    """Header and rows (as strings) of a CSV file."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
