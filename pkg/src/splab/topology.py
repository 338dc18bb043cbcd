"""Barycenter map, transplantation of radial ground states, and sublevel audits.

The barycenter beta(u) is the kinetic-density-weighted centroid.  It uses the
same one-sided difference stencil as the energy, so containment statements
about energy sublevels and beta refer to one consistent discrete functional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import Grid, RegionPredicate
from .errors import GeometryError
from .fields import RadialField, ScalarField


def _kinetic_density_dense(dense: np.ndarray, grid: Grid) -> np.ndarray:
    """Per-cell sum of squared forward differences with zero extension.

    Summing this times h gives the masked Dirichlet form u^T A u (each
    boundary-crossing face contributes the full jump to the inner cell).
    """
    out = np.zeros_like(dense)
    h = grid.spacing
    for axis in range(3):
        d = (np.roll(dense, -1, axis=axis) - dense) / h
        edge = [slice(None)] * 3
        edge[axis] = -1
        d[tuple(edge)] = 0.0
        out += d * d
    return out


def _beta_dense(dense: np.ndarray, grid: Grid):
    kd = _kinetic_density_dense(dense, grid)
    K = float(kd.sum())
    if K <= 0:
        raise ValueError("barycenter requires positive kinetic mass")
    cx, cy, cz = grid.axis_centers
    bx = float(np.einsum("ijk,i->", kd, cx)) / K
    by = float(np.einsum("ijk,j->", kd, cy)) / K
    bz = float(np.einsum("ijk,k->", kd, cz)) / K
    return np.array([bx, by, bz])


def _beta_gradient_dense(dense: np.ndarray, grid: Grid):
    """beta(u) and d(beta_i)/du as dense arrays (plain-sum representation)."""
    h = grid.spacing
    kd = _kinetic_density_dense(dense, grid)
    K = float(kd.sum())
    if K <= 0:
        raise ValueError("barycenter requires positive kinetic mass")
    cx, cy, cz = grid.axis_centers
    coords = [
        cx[:, None, None] * np.ones_like(dense),
        cy[None, :, None] * np.ones_like(dense),
        cz[None, None, :] * np.ones_like(dense),
    ]
    T = np.array([float((coords[i] * kd).sum()) for i in range(3)])
    beta = T / K
    # adjoint of kd against a cell weight field c: for each axis face (lower
    # cell at c), d contributes 2*d/h to the head and -2*d/h to the tail.
    def kd_adjoint(weight):
        acc = np.zeros_like(dense)
        for axis in range(3):
            d = (np.roll(dense, -1, axis=axis) - dense) / h
            edge = [slice(None)] * 3
            edge[axis] = -1
            d[tuple(edge)] = 0.0
            wd = weight * d * (2.0 / h)
            acc -= wd
            acc += np.roll(wd, 1, axis=axis)
        return acc

    gK = kd_adjoint(np.ones_like(dense))
    grads = []
    for i in range(3):
        gT = kd_adjoint(coords[i])
        grads.append((gT - beta[i] * gK) / K)
    return beta, grads


@dataclass
class BarycenterReport:
    beta: np.ndarray
    kinetic_mass: float
    verdicts: dict


def barycenter(u: ScalarField, grid: Grid | None = None,
               regions: dict | None = None, slack: float = 0.0) -> BarycenterReport:
    """beta(u) = int x |grad u|^2 / int |grad u|^2 with optional containment verdicts."""
    grid = grid or u.grid
    dense = u.dense()
    kd = _kinetic_density_dense(dense, grid)
    K = float(kd.sum()) * grid.cell_volume()
    if K <= 0:
        raise ValueError("barycenter requires positive kinetic mass")
    beta = _beta_dense(dense, grid)
    verdicts = {}
    for name, reg in (regions or {}).items():
        verdicts[name] = bool(reg.contains(beta[None, :], slack=slack)[0])
    return BarycenterReport(beta=beta, kinetic_mass=K, verdicts=verdicts)


def transplant(w: RadialField, y, grid: Grid, eroded: RegionPredicate,
               rho: float | None = None) -> ScalarField:
    """Place the radial ball ground state at y inside the eroded domain.

    Samples w(|x - y|) at masked-in cell centers (zero beyond the ball) and
    re-projects the mass to absorb the sampling error.
    """
    y = np.asarray(y, float).reshape(3)
    if not bool(eroded.contains(y[None, :])[0]):
        raise GeometryError(f"transplant target {y} lies outside the eroded region")
    rr = np.linalg.norm(grid.points - y, axis=1)
    vals = w.interp(rr)
    vals[rr >= w.outer_radius] = 0.0
    out = ScalarField(grid, vals)
    target = np.sqrt(w.mass()) if rho is None else rho
    from .minimize import project_mass

    return project_mass(out, target)


@dataclass
class SublevelThreshold:
    lam: float
    b_star: float
    M_term: float
    value: float
    delta: float

    @property
    def l(self) -> float:
        return self.value


def sublevel_threshold(b_star: float, lam: float, rho: float,
                       M_term_input: float, delta: float = 0.0) -> SublevelThreshold:
    """l(lambda) = b*_lambda + (1 + M * rho^4 / 4) / lambda.

    ``M_term_input`` is the margin-indexed regular-part bound M_D(delta); the
    margin used is recorded alongside the value.
    """
    if lam <= 1:
        raise ValueError("the sublevel threshold is defined for lambda > 1")
    M_term = M_term_input * rho**4 / 4.0
    value = b_star + (1.0 + M_term) / lam
    return SublevelThreshold(lam=float(lam), b_star=float(b_star),
                             M_term=float(M_term), value=float(value),
                             delta=float(delta))


@dataclass
class ContainmentVerdict:
    beta: np.ndarray
    energy: float
    inside: bool
    margin: float


@dataclass
class ContainmentReport:
    threshold: float
    verdicts: list
    all_contained: bool
    skipped: int


def containment_audit(results, region: RegionPredicate, threshold: float,
                      slack: float) -> ContainmentReport:
    """Check beta(u) in the dilated region for every result with energy <= threshold.

    Results above the threshold are outside the audit's precondition and are
    skipped (counted).  ``slack`` is the grid allowance on membership, 2h by
    convention.
    """
    verdicts = []
    skipped = 0
    for res in results:
        E = res.energy.total if hasattr(res, "energy") else float(res[0])
        beta = np.asarray(res.barycenter if hasattr(res, "barycenter") else res[1], float)
        if E > threshold:
            skipped += 1
            continue
        sd = float(region.base.signed_distance(beta[None, :])[0])
        inside = sd <= region.margin + slack
        verdicts.append(ContainmentVerdict(beta=beta, energy=E, inside=bool(inside),
                                           margin=sd - region.margin))
    ok = all(v.inside for v in verdicts)
    return ContainmentReport(threshold=threshold, verdicts=verdicts,
                             all_contained=bool(ok), skipped=skipped)


def transplant_lattice(eroded: RegionPredicate, spacing: float) -> np.ndarray:
    """Cubic lattice of transplant targets inside the eroded region."""
    lo, hi = eroded.bounding_box()
    axes = [np.arange(lo[a], hi[a] + 1e-9, spacing) for a in range(3)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    keep = eroded.contains(pts)
    return pts[keep]
