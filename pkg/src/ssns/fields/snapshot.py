"""Binary field snapshots.

Layout: the ASCII header line ``SSNS1 <n> <L> <kind> <time> <ncomp>\\n`` followed by
``ncomp * n**3`` little-endian float64 values, x-fastest within each component.
Floats in the header use ``repr`` so they round-trip exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ScalarField, SpectralVectorField
from .grid import Grid

MAGIC = "SSNS1"


@dataclass(frozen=True)
class Snapshot:
    grid: Grid
    kind: str
    time: float
    values: np.ndarray  # (ncomp, n, n, n)


def write_snapshot(path, field, kind: str, time: float) -> Path:
    path = Path(path)
    if any(ch.isspace() for ch in kind) or not kind:
        raise ValueError(f"snapshot kind must be a non-empty token, got {kind!r}")
    if isinstance(field, ScalarField):
        vals = field.values[None]
    elif isinstance(field, SpectralVectorField):
        vals = field.physical
    else:
        raise TypeError(f"cannot snapshot {type(field).__name__}")
    g = field.grid
    header = f"{MAGIC} {g.n} {g.box_length!r} {kind} {float(time)!r} {vals.shape[0]}\n"
    # values are indexed [x, y, z]; x-fastest means Fortran order per component
    body = b"".join(np.asarray(v, dtype="<f8").ravel(order="F").tobytes() for v in vals)
    path.write_bytes(header.encode("ascii") + body)
    return path


def read_snapshot(path) -> Snapshot:
    data = Path(path).read_bytes()
    nl = data.index(b"\n")
    parts = data[:nl].decode("ascii").split()
    if len(parts) != 6 or parts[0] != MAGIC:
        raise ValueError(f"{path}: not an {MAGIC} snapshot")
    n, L, kind, t, ncomp = int(parts[1]), float(parts[2]), parts[3], float(parts[4]), int(parts[5])
    grid = Grid(n, L)
    flat = np.frombuffer(data[nl + 1 :], dtype="<f8")
    if flat.size != ncomp * n**3:
        raise ValueError(f"{path}: expected {ncomp * n**3} values, found {flat.size}")
    vals = np.stack([flat[i * n**3 : (i + 1) * n**3].reshape((n, n, n), order="F") for i in range(ncomp)])
    return Snapshot(grid, kind, t, vals.astype(float))
