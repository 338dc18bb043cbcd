"""Symbolic domain specifications, their scalings, and masked finite-difference grids.

A :class:`DomainSpec` describes a set in R^3 (ball, annulus, box, solid torus,
or a truncated copy of the whole space) together with a dilation factor
``scale``.  Scaling acts on the set: ``lam * B_r(x0)`` is the ball of radius
``lam * r`` centered at ``lam * x0``, not the ball of radius ``lam * r`` at
``x0``.  Grids are uniform Cartesian lattices of cell centers, masked by a
strict interior test, so all quadrature is the midpoint rule and the
boundary error of any masked integral is O(h).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GeometryError, ResourceLimitError

DEFAULT_CELL_CAP = 192
CELL_CAP_ENV = "SPLAB_CELL_CAP"


def cell_cap() -> int:
    """Per-axis cell cap; override with the SPLAB_CELL_CAP env var."""
    return int(os.environ.get(CELL_CAP_ENV, DEFAULT_CELL_CAP))


def _vec(x) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(3)
    return v


def _vec3(x) -> tuple:
    return tuple(float(t) for t in np.asarray(x, dtype=float).reshape(3))


@dataclass(frozen=True)
class DomainSpec:
    """Symbolic geometry with an overall dilation ``scale``.

    kind: one of "ball", "annulus", "box", "solid_torus", "truncated_space".
    params: kind-specific, see the ``ball``/``annulus``/... constructors.
    """

    kind: str
    params: dict = field(compare=False)
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise GeometryError("scale must be positive")
        p = self.params
        if self.kind == "ball":
            if p["radius"] <= 0:
                raise GeometryError("ball radius must be positive")
        elif self.kind == "annulus":
            if not (0 < p["inner"] < p["outer"]):
                raise GeometryError("annulus needs 0 < inner < outer")
        elif self.kind == "box":
            lo, hi = _vec(p["lo"]), _vec(p["hi"])
            if not np.all(lo < hi):
                raise GeometryError("box needs lo < hi componentwise")
        elif self.kind == "solid_torus":
            if not (0 < p["minor"] < p["major"]):
                raise GeometryError("torus needs 0 < minor < major")
        elif self.kind == "truncated_space":
            if p["radius"] <= 0:
                raise GeometryError("truncation radius must be positive")
        else:
            raise GeometryError(f"unknown domain kind {self.kind!r}")

    # -- constructors ---------------------------------------------------
    @staticmethod
    def ball(center=(0.0, 0.0, 0.0), radius=1.0) -> "DomainSpec":
        return DomainSpec("ball", {"center": _vec3(center), "radius": float(radius)})

    @staticmethod
    def annulus(center=(0.0, 0.0, 0.0), inner=1.0, outer=2.0) -> "DomainSpec":
        return DomainSpec(
            "annulus",
            {"center": _vec3(center), "inner": float(inner), "outer": float(outer)},
        )

    @staticmethod
    def box(lo=(-1.0, -1.0, -1.0), hi=(1.0, 1.0, 1.0)) -> "DomainSpec":
        return DomainSpec("box", {"lo": _vec3(lo), "hi": _vec3(hi)})

    @staticmethod
    def solid_torus(center=(0.0, 0.0, 0.0), major=2.0, minor=0.5) -> "DomainSpec":
        return DomainSpec(
            "solid_torus",
            {"center": _vec3(center), "major": float(major), "minor": float(minor)},
        )

    @staticmethod
    def truncated_space(radius=32.0) -> "DomainSpec":
        return DomainSpec("truncated_space", {"radius": float(radius)})

    # -- geometry primitives --------------------------------------------
    def signed_distance(self, points) -> np.ndarray:
        """Signed distance to the boundary of the scaled set (negative inside).

        Exact for all supported kinds; scaling uses sdf(x; lam*D) = lam * sdf(x/lam; D).
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float)) / self.scale
        p = self.params
        if self.kind in ("ball", "truncated_space"):
            c = _vec(p.get("center", (0, 0, 0)))
            d = np.linalg.norm(pts - c, axis=1) - p["radius"]
        elif self.kind == "annulus":
            c = _vec(p["center"])
            rr = np.linalg.norm(pts - c, axis=1)
            d = np.maximum(rr - p["outer"], p["inner"] - rr)
        elif self.kind == "box":
            lo, hi = _vec(p["lo"]), _vec(p["hi"])
            cb, half = (lo + hi) / 2, (hi - lo) / 2
            q = np.abs(pts - cb) - half
            outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
            inside = np.minimum(q.max(axis=1), 0.0)
            d = outside + inside
        elif self.kind == "solid_torus":
            c = _vec(p["center"])
            rel = pts - c
            ring = np.sqrt(rel[:, 0] ** 2 + rel[:, 1] ** 2) - p["major"]
            d = np.sqrt(ring**2 + rel[:, 2] ** 2) - p["minor"]
        else:  # pragma: no cover - guarded in __post_init__
            raise GeometryError(self.kind)
        return d * self.scale

    def contains(self, points) -> np.ndarray:
        """Strict interior test."""
        return self.signed_distance(points) < 0.0

    def bounding_box(self):
        p = self.params
        if self.kind in ("ball", "truncated_space"):
            c, a = _vec(p.get("center", (0, 0, 0))), p["radius"]
            lo, hi = c - a, c + a
        elif self.kind == "annulus":
            c, a = _vec(p["center"]), p["outer"]
            lo, hi = c - a, c + a
        elif self.kind == "box":
            lo, hi = _vec(p["lo"]), _vec(p["hi"])
        elif self.kind == "solid_torus":
            c = _vec(p["center"])
            a = p["major"] + p["minor"]
            lo = c - np.array([a, a, p["minor"]])
            hi = c + np.array([a, a, p["minor"]])
        return lo * self.scale, hi * self.scale

    def inradius(self) -> float:
        """Radius of the largest ball contained in the set."""
        p = self.params
        if self.kind in ("ball", "truncated_space"):
            r = p["radius"]
        elif self.kind == "annulus":
            r = (p["outer"] - p["inner"]) / 2
        elif self.kind == "box":
            r = (np.asarray(p["hi"], float) - np.asarray(p["lo"], float)).min() / 2
        elif self.kind == "solid_torus":
            r = p["minor"]
        return float(r * self.scale)

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        out = {"kind": self.kind, "scale": self.scale}
        for k, v in self.params.items():
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    @staticmethod
    def from_json(data: dict) -> "DomainSpec":
        data = dict(data)
        kind = data.pop("kind")
        scale = float(data.pop("scale", 1.0))
        for key in ("center", "lo", "hi"):
            if key in data:
                data[key] = _vec3(data[key])
        return DomainSpec(kind, data, scale)

    def __str__(self):
        return json.dumps(self.to_json())


def scale_domain(spec: DomainSpec, lam: float) -> DomainSpec:
    """The set lam * D for lam >= 1; composition multiplies scales."""
    if lam < 1.0:
        raise GeometryError("scale_domain expands only: lambda must be >= 1")
    return DomainSpec(spec.kind, spec.params, spec.scale * float(lam))


@dataclass(frozen=True)
class RegionPredicate:
    """Margin-offset membership test: dilation (margin > 0) or erosion (margin < 0).

    Membership is sdf(x) <= margin, which realizes the closed sets
    D_r^+ = {d(x, D) <= r} and D_r^- = {x in D : d(x, boundary) >= r}.
    """

    base: DomainSpec
    margin: float

    def contains(self, points, slack: float = 0.0) -> np.ndarray:
        return self.base.signed_distance(points) <= self.margin + slack

    def bounding_box(self):
        lo, hi = self.base.bounding_box()
        m = max(self.margin, 0.0)
        return lo - m, hi + m


def region(spec: DomainSpec, margin: float) -> RegionPredicate:
    """Dilated (margin > 0) or eroded (margin < 0) copy of ``spec``."""
    if margin < 0 and -margin >= spec.inradius():
        raise GeometryError(
            f"erosion by {-margin} empties the region (inradius {spec.inradius():.3g})"
        )
    return RegionPredicate(spec, float(margin))


@dataclass(eq=False)
class Grid:
    """Uniform cell-centered lattice masked by a domain's strict interior.

    Cell centers are origin + index * h per axis.  The mask never touches the
    array edge (the build pads by at least one exterior layer), so stencil
    neighbors of interior cells always exist.
    """

    spacing: float
    origin: np.ndarray
    dims: tuple
    mask: np.ndarray
    boundary: np.ndarray
    spec: DomainSpec | None = None

    @property
    def h(self) -> float:
        return self.spacing

    @cached_property
    def n_inside(self) -> int:
        return int(self.mask.sum())

    @cached_property
    def inside_index(self) -> np.ndarray:
        """dims-shaped map: linear index among masked-in cells, -1 outside."""
        idx = np.full(self.dims, -1, dtype=np.int64)
        idx[self.mask] = np.arange(self.n_inside)
        return idx

    @cached_property
    def axis_centers(self) -> tuple:
        return tuple(self.origin[a] + self.spacing * np.arange(self.dims[a]) for a in range(3))

    @cached_property
    def points(self) -> np.ndarray:
        """(n_inside, 3) coordinates of masked-in cell centers, C order."""
        cx, cy, cz = self.axis_centers
        X, Y, Z = np.meshgrid(cx, cy, cz, indexing="ij")
        return np.stack([X[self.mask], Y[self.mask], Z[self.mask]], axis=1)

    def cell_volume(self) -> float:
        return self.spacing**3


def build_grid(spec: DomainSpec, cells_per_unit: float, pad_cells: int = 2) -> Grid:
    """Masked grid covering ``spec`` plus ``pad_cells`` exterior layers.

    h = 1 / cells_per_unit.  Per axis the covered interval is centered on the
    domain's bounding box so symmetric domains get symmetric masks.
    """
    if cells_per_unit <= 0:
        raise GeometryError("cells_per_unit must be positive")
    pad_cells = max(int(pad_cells), 1)
    h = 1.0 / float(cells_per_unit)
    lo, hi = spec.bounding_box()
    cap = cell_cap()
    dims = []
    origin = np.zeros(3)
    for a in range(3):
        width = hi[a] - lo[a]
        n = int(np.ceil(width / h - 1e-12)) + 2 * pad_cells
        if n > cap + 2 * pad_cells:
            raise ResourceLimitError(
                f"axis {'xyz'[a]} needs {n} cells at h={h:.4g}, cap is {cap} "
                f"(set {CELL_CAP_ENV} to raise)"
            )
        center = (lo[a] + hi[a]) / 2
        origin[a] = center - (n - 1) * h / 2
        dims.append(n)
    dims = tuple(dims)
    cx, cy, cz = (origin[a] + h * np.arange(dims[a]) for a in range(3))
    X, Y, Z = np.meshgrid(cx, cy, cz, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    mask = spec.contains(pts).reshape(dims)
    if not mask.any():
        raise GeometryError("empty mask: no cell center lies inside the domain")
    boundary = _boundary_layer(mask)
    return Grid(spacing=h, origin=origin, dims=dims, mask=mask, boundary=boundary, spec=spec)


def _boundary_layer(mask: np.ndarray) -> np.ndarray:
    """Masked-in cells with at least one of the six neighbors masked out."""
    interior = mask.copy()
    for axis in range(3):
        for shift in (1, -1):
            nb = np.roll(mask, shift, axis=axis)
            edge = [slice(None)] * 3
            edge[axis] = 0 if shift == 1 else -1
            nb[tuple(edge)] = False
            interior &= nb
    return mask & ~interior


def integrate(field, grid: Grid) -> float:
    """Midpoint quadrature: sum of cell values times h^3 over masked-in cells."""
    values = np.asarray(field.values if hasattr(field, "values") else field, dtype=float)
    if values.shape != (grid.n_inside,):
        raise ValueError(
            f"field has {values.shape} values, grid has {grid.n_inside} masked-in cells"
        )
    return float(values.sum() * grid.cell_volume())
