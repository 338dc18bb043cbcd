"""Field dump format: a JSON header followed by raw little-endian float64.

Layout: 4-byte magic "SPLF", uint32 version, uint64 header length, UTF-8
JSON header, then the masked-in cell values in C order.  The header stores
dims, spacing, origin and the mask as run lengths of the flattened boolean
array (alternating false/true runs, starting with the false count, possibly
zero).  Dumps round-trip byte-identically.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .domains import DomainSpec, Grid, _boundary_layer
from .fields import ScalarField

MAGIC = b"SPLF"
VERSION = 1


def mask_to_rle(mask: np.ndarray) -> list:
    flat = mask.ravel()
    out = []
    current = False
    run = 0
    for v in flat:
        if bool(v) == current:
            run += 1
        else:
            out.append(run)
            current = not current
            run = 1
    out.append(run)
    return out


def rle_to_mask(rle, dims) -> np.ndarray:
    total = int(np.prod(dims))
    flat = np.zeros(total, dtype=bool)
    pos = 0
    value = False
    for run in rle:
        if value:
            flat[pos:pos + run] = True
        pos += run
        value = not value
    if pos != total:
        raise ValueError("mask run lengths do not cover the grid")
    return flat.reshape(dims)


def dump_field(path, field: ScalarField, extra: dict | None = None):
    grid = field.grid
    header = {
        "dims": list(grid.dims),
        "h": grid.spacing,
        "origin": [float(x) for x in grid.origin],
        "mask_rle": mask_to_rle(grid.mask),
        "count": grid.n_inside,
        "spec": grid.spec.to_json() if grid.spec is not None else None,
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        f.write(np.asarray(field.values, dtype="<f8").tobytes())


def load_field(path) -> ScalarField:
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise ValueError(f"{path} is not a splab field dump")
        (version,) = struct.unpack("<I", f.read(4))
        if version != VERSION:
            raise ValueError(f"unsupported field dump version {version}")
        (hlen,) = struct.unpack("<Q", f.read(8))
        header = json.loads(f.read(hlen).decode("utf-8"))
        values = np.frombuffer(f.read(8 * header["count"]), dtype="<f8").copy()
    dims = tuple(header["dims"])
    mask = rle_to_mask(header["mask_rle"], dims)
    spec = DomainSpec.from_json(header["spec"]) if header.get("spec") else None
    grid = Grid(spacing=float(header["h"]), origin=np.asarray(header["origin"], float),
                dims=dims, mask=mask, boundary=_boundary_layer(mask), spec=spec)
    return ScalarField(grid, values)
