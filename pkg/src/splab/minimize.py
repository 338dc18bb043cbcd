"""Mass-constrained minimization of the energy over the L2 sphere.

The iteration is projected Riemannian descent: the unconstrained gradient is
projected onto the tangent space of the mass sphere, a trial step is taken,
and renormalization retracts the iterate back onto the constraint.  Armijo
backtracking guards every step; trial steps use Barzilai-Borwein curvature
estimates, which tame the 1/h^2 stiffness of the Laplacian.  One Poisson
solve per iterate is shared between energy, gradient and multiplier, and in
3D it is warm-started from the previous iterate's potential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import Grid
from .elliptic import _cg, laplacian
from .energy import EnergyBreakdown, MultiplierEstimate
from .fields import RadialField, ScalarField
from .radial import RadialProblem, odd_power


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 20_000
    grad_tol: float = 1e-7
    step0: float = 1.0
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    restarts: int = 1
    seed: int = 0
    poisson_tol: float = 1e-9
    stall_window: int = 200

    def __post_init__(self):
        if not (0 < self.armijo_c1 < 1):
            raise ValueError("armijo_c1 must lie in (0, 1)")
        if not (0 < self.backtrack < 1):
            raise ValueError("backtrack ratio must lie in (0, 1)")
        if min(self.max_iters, self.grad_tol, self.step0, self.restarts) <= 0:
            raise ValueError("solver options must be positive")


@dataclass
class SolveResult:
    u: object
    energy: EnergyBreakdown
    omega: MultiplierEstimate
    barycenter: np.ndarray
    iters: int
    grad_norm: float
    nonneg: bool
    stagnated: bool = False
    seed: int = 0
    penalized_total: float | None = None
    bary_violation: bool | None = None

    @property
    def flags(self) -> list:
        out = []
        if self.stagnated:
            out.append("stagnation")
        if not self.nonneg:
            out.append("negative_part")
        if self.bary_violation:
            out.append("barycenter_violation")
        return out


def project_mass(u, rho: float):
    """rho * u / |u|_L2 for either field type."""
    m = u.mass()
    if m <= 0:
        raise ValueError("cannot mass-project a zero field")
    scaled = u.values * (rho / np.sqrt(m))
    if isinstance(u, RadialField):
        return RadialField(scaled, u.h)
    return ScalarField(u.grid, scaled)


# ----------------------------------------------------------------------
# problem adapters

class _GridProblem:
    """3D adapter: energy terms, gradient and sphere geometry on a masked grid."""

    def __init__(self, grid: Grid, p: float, rho: float, poisson_tol: float = 1e-9):
        self.grid = grid
        self.p = float(p)
        self.rho = float(rho)
        self.A = laplacian(grid)
        self.h3 = grid.cell_volume()
        self.poisson_tol = poisson_tol
        self._phi = None

    def apply_ties(self, u):
        return u

    def project(self, u):
        m = float(np.sum(u * u)) * self.h3
        return u * (self.rho / np.sqrt(m))

    def solve_potential(self, u2):
        phi, _ = _cg(self.A, u2, self.poisson_tol, x0=self._phi)
        self._phi = phi
        return phi

    def energy_terms(self, u):
        kin = 0.5 * float(u @ (self.A @ u)) * self.h3
        u2 = u * u
        phi = self.solve_potential(u2)
        nl = 0.25 * float(np.sum(phi * u2)) * self.h3
        pw = (1.0 / self.p) * float(np.sum(np.abs(u) ** self.p)) * self.h3
        return kin, nl, pw, phi

    def energy_extra(self, u):
        return 0.0

    def gradient(self, u, phi):
        return self.A @ u + phi * u - odd_power(u, self.p - 1.0)

    def tangential(self, g, u):
        gu = float(np.sum(g * u)) * self.h3
        return g - (gu / self.rho**2) * u

    def norm(self, v):
        return float(np.sqrt(np.sum(v * v) * self.h3))

    def multiplier(self, u, phi):
        grad2 = float(u @ (self.A @ u)) * self.h3
        phiu2 = float(np.sum(phi * u * u)) * self.h3
        powp = float(np.sum(np.abs(u) ** self.p)) * self.h3
        omega = (grad2 + phiu2 - powp) / self.rho**2
        g = self.gradient(u, phi)
        res = self.norm(g - omega * u)
        return omega, res

    def field(self, u):
        return ScalarField(self.grid, u.copy())


class _PenalizedGridProblem(_GridProblem):
    """Grid problem plus mu * |beta(u) - target|^2 with the exact discrete beta."""

    def __init__(self, grid, p, rho, target, mu, poisson_tol=1e-9):
        super().__init__(grid, p, rho, poisson_tol)
        self.target = np.asarray(target, float).reshape(3)
        self.mu = float(mu)
        from .topology import _beta_dense, _beta_gradient_dense

        self._beta_dense = _beta_dense
        self._beta_grad = _beta_gradient_dense

    def beta(self, u):
        dense = np.zeros(self.grid.dims)
        dense[self.grid.mask] = u
        return self._beta_dense(dense, self.grid)

    def energy_extra(self, u):
        b = self.beta(u)
        return self.mu * float(np.sum((b - self.target) ** 2))

    def gradient(self, u, phi):
        g = super().gradient(u, phi)
        dense = np.zeros(self.grid.dims)
        dense[self.grid.mask] = u
        b, gb = self._beta_grad(dense, self.grid)
        pen = np.zeros(self.grid.dims)
        for i in range(3):
            pen += (2.0 * self.mu * (b[i] - self.target[i])) * gb[i]
        return g + pen[self.grid.mask] / self.h3


# ----------------------------------------------------------------------
# descent engine

def _descend(prob, u0: np.ndarray, opts: SolverOptions):
    """BB-trial projected descent with Armijo backtracking on the mass sphere."""
    wt = getattr(prob, "w", None)
    if wt is None:
        wt = prob.h3
    u = prob.project(prob.apply_ties(u0.copy()))
    kin, nl, pw, phi = prob.energy_terms(u)
    E = kin + nl - pw + prob.energy_extra(u)
    g = prob.gradient(u, phi)
    gT = prob.apply_ties(prob.tangential(g, u))
    step = opts.step0
    u_prev = gT_prev = None
    stagnated = False
    best_E = E
    since_improve = 0
    it = 0
    for it in range(opts.max_iters):
        gnorm = prob.norm(gT)
        if gnorm <= opts.grad_tol:
            break
        if u_prev is not None:
            s = u - u_prev
            y = gT - gT_prev
            sy = float(np.sum(s * y * wt))
            if sy > 0:
                ss = float(np.sum(s * s * wt))
                yy = float(np.sum(y * y * wt))
                step = ss / sy if it % 2 == 0 else sy / yy
            step = min(max(step, 1e-12), 1e8)
        trial = step
        accepted = False
        for _ in range(60):
            ut = prob.project(prob.apply_ties(u - trial * gT))
            kin2, nl2, pw2, phi2 = prob.energy_terms(ut)
            E2 = kin2 + nl2 - pw2 + prob.energy_extra(ut)
            if E2 <= E - opts.armijo_c1 * trial * gnorm**2:
                accepted = True
                break
            trial *= opts.backtrack
            if trial < 1e-18:
                break
        if not accepted:
            stagnated = True
            break
        u_prev, gT_prev = u, gT
        u, E, phi = ut, E2, phi2
        kin, nl, pw = kin2, nl2, pw2
        g = prob.gradient(u, phi)
        gT = prob.apply_ties(prob.tangential(g, u))
        if E < best_E - 1e-13 * (1.0 + abs(best_E)):
            best_E = E
            since_improve = 0
        else:
            since_improve += 1
            if since_improve >= opts.stall_window:
                stagnated = True
                break
    gnorm = prob.norm(gT)
    if gnorm > opts.grad_tol and not stagnated and it + 1 >= opts.max_iters:
        stagnated = True
    omega, res = prob.multiplier(u, phi)
    return {
        "u": u, "E": E, "kin": kin, "nl": nl, "pw": pw, "phi": phi,
        "omega": omega, "el_residual": res, "iters": it + 1,
        "grad_norm": gnorm, "stagnated": stagnated,
    }


def _mk_result(prob, raw, p, seed, barycenter=None, penalized=None, violation=None):
    uf = prob.field(raw["u"])
    energy = EnergyBreakdown.from_terms(raw["kin"], raw["nl"], raw["pw"], p, uf.mass())
    omega = MultiplierEstimate(omega=raw["omega"], residual=raw["el_residual"])
    umax = float(np.abs(raw["u"]).max()) if raw["u"].size else 0.0
    nonneg = bool(raw["u"].min() >= -1e-8 * max(1.0, umax))
    if barycenter is None:
        if isinstance(uf, ScalarField):
            from .topology import barycenter as _bc

            barycenter = _bc(uf, uf.grid).beta
        else:
            barycenter = np.zeros(3)
    return SolveResult(
        u=uf, energy=energy, omega=omega, barycenter=np.asarray(barycenter, float),
        iters=raw["iters"], grad_norm=raw["grad_norm"], nonneg=nonneg,
        stagnated=raw["stagnated"], seed=seed,
        penalized_total=penalized, bary_violation=violation,
    )


# ----------------------------------------------------------------------
# initial iterates

def _gaussian_values(points, center, width):
    d2 = np.sum((points - center) ** 2, axis=1)
    return np.exp(-d2 / (2.0 * width**2))


def _initial_3d(grid: Grid, preset, rng, center=None, width=None):
    spec = grid.spec
    if center is None:
        lo, hi = spec.bounding_box() if spec is not None else (
            grid.points.min(axis=0), grid.points.max(axis=0))
        center = (np.asarray(lo) + np.asarray(hi)) / 2
    inr = spec.inradius() if spec is not None else float(
        (grid.points.max(axis=0) - grid.points.min(axis=0)).min() / 2)
    if width is None:
        width = max(inr / 2.0, 2.0 * grid.spacing)
    if isinstance(preset, ScalarField):
        return preset.values.copy()
    if preset == "gaussian":
        return _gaussian_values(grid.points, center, width)
    if preset == "gaussian_jitter":
        shift = rng.uniform(-inr / 3, inr / 3, size=3)
        scale = rng.uniform(0.5, 1.5)
        return _gaussian_values(grid.points, center + shift, width * scale)
    if preset == "eigenfield":
        from .elliptic import first_eigenvalue

        _, ef = first_eigenvalue(grid, tol=1e-4)
        return np.abs(ef.values)
    if preset == "random":
        vals = rng.random(grid.n_inside) + 0.1
        A = laplacian(grid)
        for _ in range(5):
            vals = vals - (grid.spacing**2 / 12.0) * (A @ vals)
        return np.maximum(vals, 1e-3)
    raise ValueError(f"unknown init preset {preset!r}")


def minimize_constrained(grid: Grid, p: float, rho: float, init="gaussian",
                         opts: SolverOptions | None = None,
                         center=None, width=None) -> SolveResult:
    """Best-of-multistart constrained minimizer of I(.; D) on the mass sphere."""
    opts = opts or SolverOptions(max_iters=3000, grad_tol=1e-5)
    if rho <= 0:
        raise ValueError("rho must be positive")
    best = None
    for k in range(opts.restarts):
        rng = np.random.default_rng(opts.seed + k)
        preset = init if k == 0 or isinstance(init, ScalarField) else (
            "gaussian_jitter" if init == "gaussian" else init)
        u0 = _initial_3d(grid, preset, rng, center=center, width=width)
        prob = _GridProblem(grid, p, rho, poisson_tol=opts.poisson_tol)
        raw = _descend(prob, u0, opts)
        res = _mk_result(prob, raw, p, seed=opts.seed + k)
        if best is None or res.energy.total < best.energy.total:
            best = res
    return best


def radial_minimize(outer_radius: float, p: float, rho: float, n_points: int = 2048,
                    opts: SolverOptions | None = None, potential: str = "dirichlet",
                    nl_weight: float = 1.0, init="scan") -> SolveResult:
    """Radial constrained minimizer on B_a (or truncated space with the Newton
    potential); used for b*_lambda, c_inf and the rescaled unit-mass problem."""
    if n_points < 512:
        raise ValueError("radial meshes need at least 512 points")
    opts = opts or SolverOptions()
    prob = RadialProblem(outer_radius, n_points, p, rho,
                         potential=potential, nl_weight=nl_weight)
    best = None
    for k in range(opts.restarts):
        rng = np.random.default_rng(opts.seed + k)
        if isinstance(init, RadialField):
            u0 = init.interp(prob.r)
        elif init == "scan":
            u0 = _scan_gaussian(prob, rng if k else None)
        else:
            raise ValueError(f"unknown radial init {init!r}")
        raw = _descend(prob, u0, opts)
        res = _mk_result(prob, raw, p, seed=opts.seed + k)
        if best is None or res.energy.total < best.energy.total:
            best = res
    return best


def _scan_gaussian(prob: RadialProblem, rng=None):
    """Width-scanned mass-projected Gaussian: deterministic coarse basin search."""
    lo = max(2 * prob.h, prob.a / 200.0)
    widths = np.geomspace(lo, prob.a / 2.5, 48)
    if rng is not None:
        widths = widths * rng.uniform(0.85, 1.18, size=len(widths))
    best_u, best_E = None, np.inf
    for s in widths:
        u = np.exp(-prob.r**2 / (2 * s * s))
        u = prob.apply_ties(u)
        u = prob.project(u)
        E = prob.energy(u)
        if E < best_E:
            best_u, best_E = u, E
    return best_u


def minimize_with_barycenter(grid: Grid, p: float, rho: float, target,
                             opts: SolverOptions | None = None,
                             mu0: float = 1.0, mu_growth: float = 10.0,
                             max_stages: int = 5, bary_tol: float | None = None,
                             init="pair") -> SolveResult:
    """Penalized barycenter-pinned minimization; certifies an upper bound on
    the pinned infimum a(R, r, lambda) when the constraint is met."""
    opts = opts or SolverOptions(max_iters=2000, grad_tol=1e-5)
    target = np.asarray(target, float).reshape(3)
    bary_tol = grid.spacing if bary_tol is None else bary_tol
    rng = np.random.default_rng(opts.seed)
    u0 = _initial_annulus(grid, target, init, rng)
    mu = mu0
    raw = None
    prob = None
    for stage in range(max_stages):
        prob = _PenalizedGridProblem(grid, p, rho, target, mu,
                                     poisson_tol=opts.poisson_tol)
        raw = _descend(prob, u0, opts)
        u0 = raw["u"]
        beta = prob.beta(raw["u"])
        if float(np.linalg.norm(beta - target)) <= bary_tol:
            break
        mu *= mu_growth
    beta = prob.beta(raw["u"])
    violation = bool(np.linalg.norm(beta - target) > bary_tol)
    penalized = raw["E"]
    # report the unpenalized energy of the final iterate
    plain = _GridProblem(grid, p, rho, poisson_tol=opts.poisson_tol)
    kin, nl, pw, phi = plain.energy_terms(raw["u"])
    raw = dict(raw, kin=kin, nl=nl, pw=pw, E=kin + nl - pw)
    omega, res = plain.multiplier(raw["u"], phi)
    raw["omega"], raw["el_residual"] = omega, res
    return _mk_result(plain, raw, p, seed=opts.seed, barycenter=beta,
                      penalized=penalized, violation=violation)


def _initial_annulus(grid: Grid, target, init, rng):
    spec = grid.spec
    if isinstance(init, ScalarField):
        return init.values.copy()
    if spec is not None and spec.kind == "annulus":
        inner = spec.params["inner"] * spec.scale
        outer = spec.params["outer"] * spec.scale
        mid = 0.5 * (inner + outer)
        width = max(0.25 * (outer - inner), 2 * grid.spacing)
    else:
        mid = 0.5 * float(np.linalg.norm(grid.points - target, axis=1).max())
        width = mid / 2
    if init == "ring":
        rr = np.linalg.norm(grid.points - target, axis=1)
        return np.exp(-((rr - mid) ** 2) / (2 * width**2))
    # symmetric antipodal pair keeps beta at the target by construction
    axis = np.zeros(3)
    axis[0] = mid
    a = _gaussian_values(grid.points, target + axis, width)
    b = _gaussian_values(grid.points, target - axis, width)
    return a + b
