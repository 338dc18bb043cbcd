"""The constrained energy functional, its first variation, and the multiplier.

For a field u on a bounded domain D the energy is

    I(u; D) = 1/2 int |grad u|^2 + 1/4 int phi_u u^2 - 1/p int |u|^p,

with phi_u the Dirichlet potential of the density u^2.  The free-space
variant replaces phi_u by the Newton potential.  The 3D kinetic term uses
forward differences with zero extension, which coincides with the quadratic
form of the masked 7-point Laplacian, so energies, gradients and the
discrete Euler-Lagrange identity are mutually consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import radial as _radial
from .domains import Grid, cell_cap
from .elliptic import laplacian, poisson_dirichlet
from .errors import ResourceLimitError
from .fields import RadialField, ScalarField


@dataclass
class EnergyBreakdown:
    """Kinetic, nonlocal and power terms of the energy, with total = k + n - p."""

    kinetic: float
    nonlocal_: float
    power: float
    total: float
    p: float
    mass: float

    @staticmethod
    def from_terms(kinetic, nonlocal_, power, p, mass) -> "EnergyBreakdown":
        return EnergyBreakdown(
            kinetic=float(kinetic),
            nonlocal_=float(nonlocal_),
            power=float(power),
            total=float(kinetic) + float(nonlocal_) - float(power),
            p=float(p),
            mass=float(mass),
        )

    def as_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "nonlocal": self.nonlocal_,
            "power": self.power,
            "total": self.total,
            "omega": None,
            "mass": self.mass,
        }


@dataclass
class MultiplierEstimate:
    """Lagrange multiplier and the L2 norm of the Euler-Lagrange defect."""

    omega: float
    residual: float


def _check_p(p: float):
    if not (2.0 < p < 3.0):
        raise ValueError(f"p must lie in (2, 3), got {p}")


def kinetic_energy(u: ScalarField, grid: Grid) -> float:
    """1/2 int |grad u|^2 via the Dirichlet form of the masked Laplacian."""
    A = laplacian(grid)
    return 0.5 * float(u.values @ (A @ u.values)) * grid.cell_volume()


def energy_domain(u: ScalarField, grid: Grid | None = None, p: float = 2.5,
                  phi: ScalarField | None = None,
                  poisson_tol: float = 1e-10) -> EnergyBreakdown:
    """Energy on the grid's domain; one Poisson solve unless phi is supplied."""
    grid = grid or u.grid
    _check_p(p)
    if u.grid is not grid:
        raise ValueError("field is not defined on the given grid")
    if phi is None:
        phi = poisson_dirichlet(ScalarField(grid, u.values**2), grid, tol=poisson_tol)
    h3 = grid.cell_volume()
    kin = kinetic_energy(u, grid)
    nl = 0.25 * float(np.sum(phi.values * u.values**2)) * h3
    pw = (1.0 / p) * float(np.sum(np.abs(u.values) ** p)) * h3
    return EnergyBreakdown.from_terms(kin, nl, pw, p, u.mass())


def gradient(u: ScalarField, grid: Grid | None = None, p: float = 2.5,
             phi: ScalarField | None = None) -> ScalarField:
    """Unconstrained first variation g = -Delta_h u + phi_u u - |u|^(p-2) u."""
    grid = grid or u.grid
    _check_p(p)
    if phi is None:
        phi = poisson_dirichlet(ScalarField(grid, u.values**2), grid)
    A = laplacian(grid)
    v = u.values
    g = A @ v + phi.values * v - _radial.odd_power(v, p - 1.0)
    return ScalarField(grid, g)


def multiplier(u: ScalarField, grid: Grid | None = None, p: float = 2.5,
               phi: ScalarField | None = None) -> MultiplierEstimate:
    """omega = (int |grad u|^2 + int phi u^2 - int |u|^p) / rho^2 plus EL defect."""
    grid = grid or u.grid
    _check_p(p)
    rho2 = u.mass()
    if rho2 <= 0:
        raise ValueError("multiplier requires a field with positive mass")
    if phi is None:
        phi = poisson_dirichlet(ScalarField(grid, u.values**2), grid)
    h3 = grid.cell_volume()
    A = laplacian(grid)
    v = u.values
    grad2 = float(v @ (A @ v)) * h3
    phiu2 = float(np.sum(phi.values * v**2)) * h3
    powp = float(np.sum(np.abs(v) ** p)) * h3
    omega = (grad2 + phiu2 - powp) / rho2
    g = A @ v + phi.values * v - _radial.odd_power(v, p - 1.0)
    residual = float(np.sqrt(np.sum((g - omega * v) ** 2) * h3))
    return MultiplierEstimate(omega=omega, residual=residual)


def energy_freespace(u, p: float = 2.5, pad_factor: float = 3.0,
                     grid: Grid | None = None) -> EnergyBreakdown:
    """Energy with the whole-space (Newton) potential.

    Radial fields use the exact quadrature kernel.  3D fields are re-embedded
    in a padded aligned ball grid of at least ``pad_factor`` times the support
    diameter; the Dirichlet potential there is corrected by the mean-value
    monopole term Q / (4 pi L), an O((d/L)^2)-accurate approximation.
    """
    _check_p(p)
    if isinstance(u, RadialField):
        prob = _radial.RadialProblem.from_field(u, p, potential="newton")
        kin, nl, pw, _ = prob.energy_terms(u.values)
        return EnergyBreakdown.from_terms(kin, nl, pw, p, u.mass())
    if pad_factor < 2.0:
        raise ValueError("free-space padding must be at least 2x the support diameter")
    grid = grid or u.grid
    supp = np.abs(u.values) > 0
    if not supp.any():
        return EnergyBreakdown.from_terms(0.0, 0.0, 0.0, p, 0.0)
    pts = grid.points[supp]
    center = pts.mean(axis=0)
    d = float(np.linalg.norm(pts - center, axis=1).max() * 2 + 2 * grid.spacing)
    L = 0.5 * pad_factor * d
    pad_grid, embed = _aligned_ball_grid(grid, center, L)
    if not (embed[supp] >= 0).all():
        raise ValueError("support does not embed in the padded ball; increase pad_factor")
    uv = np.zeros(pad_grid.n_inside)
    uv[embed[supp]] = u.values[supp]
    up = ScalarField(pad_grid, uv)
    phi = poisson_dirichlet(ScalarField(pad_grid, uv**2), pad_grid)
    h3 = pad_grid.cell_volume()
    Q = up.mass()
    kin = kinetic_energy(up, pad_grid)
    nl = 0.25 * float(np.sum(phi.values * uv**2)) * h3 + Q * Q / (16.0 * np.pi * L)
    pw = (1.0 / p) * float(np.sum(np.abs(uv) ** p)) * h3
    return EnergyBreakdown.from_terms(kin, nl, pw, p, Q)


def _aligned_ball_grid(grid: Grid, center: np.ndarray, L: float):
    """Ball grid sharing the source lattice so cell values transfer exactly."""
    from .domains import DomainSpec

    h = grid.spacing
    dims, origin = [], np.zeros(3)
    for a in range(3):
        k_lo = int(np.floor((center[a] - L - grid.origin[a]) / h)) - 1
        k_hi = int(np.ceil((center[a] + L - grid.origin[a]) / h)) + 1
        n = k_hi - k_lo + 1
        if n > cell_cap() + 4:
            raise ResourceLimitError(
                f"free-space padding needs {n} cells on axis {'xyz'[a]}, cap {cell_cap()}"
            )
        origin[a] = grid.origin[a] + k_lo * h
        dims.append(n)
    dims = tuple(dims)
    spec = DomainSpec.ball(center=tuple(center), radius=L)
    cx, cy, cz = (origin[a] + h * np.arange(dims[a]) for a in range(3))
    X, Y, Z = np.meshgrid(cx, cy, cz, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    mask = spec.contains(pts).reshape(dims)
    from .domains import _boundary_layer

    pad_grid = Grid(spacing=h, origin=origin, dims=dims, mask=mask,
                    boundary=_boundary_layer(mask), spec=spec)
    # map each source masked-in cell to its index in the padded grid
    offs = np.rint((grid.origin - origin) / h).astype(int)
    src_idx = np.argwhere(grid.mask) + offs
    embed_flat = pad_grid.inside_index[src_idx[:, 0], src_idx[:, 1], src_idx[:, 2]]
    embed = np.full(grid.n_inside, -1, dtype=np.int64)
    embed[:] = embed_flat
    return pad_grid, embed
