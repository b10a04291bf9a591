"""Reading and writing parameter files and sampled profiles."""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._validation import DomainError
from .scaling import Parameters, PhiProfile, VProfile

V_COLUMNS = ("t", "v", "dv")
PHI_COLUMNS = ("r", "phi", "dphi")


def load_params(source) -> Parameters:
    """Parameters from a JSON file or mapping with keys ``N``, ``A``, ``alpha``, ``p``.

    Values may be numbers or strings such as ``"16/5"``; strings stay exact.
    """
    data = source if isinstance(source, dict) else json.loads(Path(source).read_text())
    missing = [k for k in ("N", "alpha", "p") if k not in data]
    if missing:
        raise DomainError(f"parameter file lacks {missing}")
    return Parameters(int(data["N"]), data.get("A", 1), data["alpha"], data["p"])


def to_jsonable(obj):
    """Recursively convert fractions, numpy scalars, enums and non-finite floats for :mod:`json`."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value") and hasattr(obj, "name"):
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2)


def write_profile(profile, path=None) -> str:
    """CSV text (``t,v,dv`` or ``r,phi,dphi``); also written to ``path`` when given."""
    cols = PHI_COLUMNS if isinstance(profile, PhiProfile) else V_COLUMNS
    lines = [",".join(cols)]
    for row in zip(profile.grid, profile.values, profile.derivative_values):
        lines.append(",".join(repr(float(x)) for x in row))
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_profile(path):
    """Profile from CSV; the header decides between ``VProfile`` and ``PhiProfile``.

    A missing derivative column is filled by finite differences.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [[float(x) for x in row] for row in reader if row]
    if not rows:
        raise DomainError(f"{path}: no data rows")
    data = np.asarray(rows)
    kind = VProfile if header[0] == "t" else PhiProfile if header[0] == "r" else None
    if kind is None:
        raise DomainError(f"{path}: first column must be 't' or 'r', got {header[0]!r}")
    deriv = data[:, 2] if data.shape[1] > 2 else None
    return kind(data[:, 0], data[:, 1], deriv)
