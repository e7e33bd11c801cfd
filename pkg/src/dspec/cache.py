# cache.py
"""Versioned binary cache for solved eigenfunction tables.

Layout: magic line ``DSPEC1``, one JSON header line (construction
parameters and array manifest), then the arrays appended in manifest order
in npy format.  Loading validates the magic and rebuilds the table; a
mismatched version or corrupted header is a hard error, not a silent
rebuild.  Writing is deterministic, so equal tables produce equal file
hashes.
"""

from __future__ import annotations

import hashlib
import io
import json

import numpy as np

from .grids import KGrid, RadialGrid
from .potential import RadialPotential
from .radialwave import EigenfunctionTable

CACHE_MAGIC = b"DSPEC1"

_ARRAYS = ("delta", "delta_unwrapped", "match_residuals", "swave", "full_waves")


def table_header(table: EigenfunctionTable) -> dict:
    p = table.potential
    return {
        "potential": {"kind": p.kind, "amplitude": p.amplitude,
                      "width": p.width, "r_cut": p.r_cut},
        "grid": {"r_max": table.grid.r_max, "n_points": table.grid.n_points},
        "kgrid": {"kappa_min": table.kgrid.kappa_min,
                  "kappa_max": table.kgrid.kappa_max,
                  "n_points": table.kgrid.n_points},
        "l_max": table.l_max,
        "assembly_indices": list(table.assembly_indices),
        "v0": table.v0,
        "arrays": list(_ARRAYS),
    }


def save_table(path, table: EigenfunctionTable) -> str:
    """Write the table; returns the sha256 hex digest of the file."""
    buf = io.BytesIO()
    buf.write(CACHE_MAGIC + b"\n")
    header = json.dumps(table_header(table), sort_keys=True)
    buf.write(header.encode() + b"\n")
    for name in _ARRAYS:
        np.save(buf, np.ascontiguousarray(getattr(table, name)), allow_pickle=False)
    blob = buf.getvalue()
    with open(path, "wb") as f:
        f.write(blob)
    return hashlib.sha256(blob).hexdigest()


def load_table(path) -> EigenfunctionTable:
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != CACHE_MAGIC:
            raise ValueError(
                f"cache version mismatch: expected {CACHE_MAGIC.decode()}, "
                f"found {magic[:16].decode(errors='replace')!r}"
            )
        header = json.loads(f.readline().decode())
        arrays = {name: np.load(f, allow_pickle=False) for name in header["arrays"]}
    pot = RadialPotential(**header["potential"])
    grid = RadialGrid(**header["grid"])
    kgrid = KGrid(**header["kgrid"])
    return EigenfunctionTable(
        potential=pot, grid=grid, kgrid=kgrid, l_max=header["l_max"],
        delta=arrays["delta"], delta_unwrapped=arrays["delta_unwrapped"],
        match_residuals=arrays["match_residuals"], swave=arrays["swave"],
        assembly_indices=header["assembly_indices"],
        full_waves=arrays["full_waves"], v0=header["v0"],
    )


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
