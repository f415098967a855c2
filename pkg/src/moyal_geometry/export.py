"""CSV tables and JSON run sidecars.

Floats are written with 17 significant digits so tables round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import math
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["fmt", "write_csv", "append_csv_row", "read_csv", "write_sidecar", "solution_rows"]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return ""
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def append_csv_row(path, header: Sequence[str], row: Sequence) -> None:
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(header)
        w.writerow([fmt(v) for v in row])
        fh.flush()


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_sidecar(path, command: str, params: Mapping, precision: str, started: float, **extra) -> Path:
    """JSON metadata next to a table: command, params, precision, version, timing."""
    from . import __version__

    data = {
        "command": command,
        "params": _jsonable(dict(params)),
        "precision": precision,
        "library_version": __version__,
        "wall_time_seconds": time.perf_counter() - started,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    data.update(_jsonable(extra))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def solution_rows(sol):
    """Rows ``(n, phi_n, gb_partial_n, residual_n)``; the last row has no partial."""
    phi = sol.phi
    for n in range(phi.size):
        if n < phi.size - 1:
            yield n, phi[n], sol.gb_partials[n], sol.residuals[n]
        else:
            yield n, phi[n], None, None
