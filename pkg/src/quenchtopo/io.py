"""CSV and JSON writers (and the density reader).

Reals are written with 17 significant digits so a file read back gives the
same doubles. JSON keys are sorted, which makes repeated runs byte-identical.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError

DENSITY_COLUMNS = ("q", "n_up", "n_down", "shots")


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_csv(path, columns):
    """Write a dict of equal-length columns (insertion order) with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = [np.asarray(columns[c]) if not isinstance(columns[c], list) else columns[c]
            for c in names]
    lengths = {len(c) for c in data}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*data):
            writer.writerow([_fmt(v) for v in row])
    return path


def write_rows(path, header, rows):
    """Write a list of row dicts, in order, restricted to ``header``."""
    return write_csv(path, {h: [r[h] for r in rows] for h in header})


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_plain(v) for v in items]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def write_densities(path, densities):
    return write_csv(path, {"q": densities.q, "n_up": densities.n_up,
                            "n_down": densities.n_down, "shots": densities.shots})


def read_densities(path, seed=None):
    """Load a ``q,n_up,n_down,shots`` table (measured or synthetic)."""
    from .coldatom import DensityProfile

    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(DENSITY_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    try:
        q = np.array([float(r["q"]) for r in rows])
        counts = {c: np.array([int(r[c]) for r in rows], dtype=np.int64)
                  for c in DENSITY_COLUMNS[1:]}
    except ValueError as exc:
        raise ConfigError(f"{path}: bad entry ({exc})") from None
    return DensityProfile(q=q, seed=seed, **counts)
