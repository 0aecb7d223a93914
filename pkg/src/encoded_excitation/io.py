"""Delimited data files and JSON run records."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def write_table(path: Path, header: list[str], columns, *, delimiter: str = ",") -> Path:
    """Write equal-length columns with a header row at full double precision."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=delimiter, header=delimiter.join(header), comments="")
    return path


def read_table(path: Path, *, delimiter: str = ",") -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=delimiter, names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def write_mode(path: Path, mode) -> Path:
    """Temporal mode as columns t, re, im, abs2."""
    z = np.asarray(mode.values)
    return write_table(path, ["t", "re", "im", "abs2"], [mode.grid.t, z.real, z.imag, np.abs(z) ** 2])


def write_spectrum(path: Path, xi) -> Path:
    """Spectral amplitude as columns omega, re, im, abs2."""
    z = np.asarray(xi.values)
    return write_table(path, ["omega", "re", "im", "abs2"], [xi.grid.omega, z.real, z.imag, np.abs(z) ** 2])


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.integer, np.bool_)):
        return value.item()
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def write_json(path: Path, record: dict) -> Path:
    path.write_text(json.dumps(_plain(record), indent=2, sort_keys=True) + "\n")
    return path
