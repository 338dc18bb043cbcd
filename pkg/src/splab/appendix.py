"""Embedding constants, the small-mass positivity threshold, and their collapse
on expanding domains.

C_D is the best Rayleigh quotient |u|_{L^q} / ||u||_{H^1(D)} found by
normalized gradient ascent over the Neumann-type discrete H^1 space (one-sided
differences, interior faces only, no boundary zeroing), with q = 4/(4-p).
Any feasible u certifies a lower bound on the true sup, so the derived
threshold rho_D = (p / 4 C~_D)^(1/(p-2)) is a one-sided (upper) estimate.
C~_D = C_D^2 (1 + 1/mu_1(D)) grows like lambda^2 / mu_1(D) on dilated
domains, which drives rho_(lambda D) -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import DomainSpec, Grid, build_grid, cell_cap, scale_domain
from .elliptic import first_eigenvalue
from .fields import ScalarField
from .minimize import SolverOptions, minimize_constrained


@dataclass
class EmbeddingReport:
    C_D: float
    C_tilde: float
    rho_D: float
    mu1: float
    p: float
    ascent_stalled: bool = False


def _neumann_h1(dense: np.ndarray, mask: np.ndarray, h: float):
    """(||grad u||^2, adjoint gradient array) over interior faces only."""
    total = 0.0
    grad = np.zeros_like(dense)
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        both = mask[tuple(lo)] & mask[tuple(hi)]
        d = np.zeros(both.shape)
        d[both] = (dense[tuple(hi)][both] - dense[tuple(lo)][both]) / h
        total += float(np.sum(d * d))
        back = np.zeros_like(dense)
        fwd = np.zeros_like(dense)
        back[tuple(lo)] = -2.0 * d / h
        fwd[tuple(hi)] = 2.0 * d / h
        grad += back + fwd
    return total * h**3, grad * h**3


def embedding_constant(grid: Grid, p: float, opts: SolverOptions | None = None,
                       mu1: float | None = None, max_iters: int = 2000) -> EmbeddingReport:
    """Lower-bound C_D by multistart normalized gradient ascent on |u|_q/||u||_H1."""
    if not (2.0 < p < 3.0):
        raise ValueError("p must lie in (2, 3)")
    opts = opts or SolverOptions()
    q = 4.0 / (4.0 - p)
    mask = grid.mask
    h = grid.spacing
    h3 = grid.cell_volume()
    pts = grid.points
    center = pts.mean(axis=0)
    rng = np.random.default_rng(opts.seed)
    inits = {
        "const": np.ones(grid.n_inside),
        "bump": np.exp(-np.sum((pts - center) ** 2, axis=1)),
        "rand": rng.random(grid.n_inside) + 0.1,
    }
    best_Q, stalled = -np.inf, False

    def quotient(dense):
        K, gK = _neumann_h1(dense, mask, h)
        M = float(np.sum(dense[mask] ** 2)) * h3
        S = float(np.sum(np.abs(dense[mask]) ** q)) * h3
        Q = S ** (1.0 / q) / np.sqrt(K + M)
        return Q, K, M, S, gK

    for vals in inits.values():
        dense = np.zeros(grid.dims)
        dense[mask] = vals
        Q, K, M, S, gK = quotient(dense)
        step = 1.0
        prev = gprev = None
        for it in range(max_iters):
            # ascent direction for log Q
            g = np.zeros_like(dense)
            g[mask] = np.abs(dense[mask]) ** (q - 2.0) * dense[mask] * h3 / S
            g -= (gK + 2.0 * dense * mask * h3) / (2.0 * (K + M))
            if prev is not None:
                s = (dense - prev)[mask]
                y = -(g - gprev)[mask]
                sy = float(s @ y)
                if sy > 0:
                    step = float(s @ s) / sy if it % 2 == 0 else sy / float(y @ y)
                    step = min(max(step, 1e-10), 1e6)
            accepted = False
            trial = step
            for _ in range(50):
                cand = dense + trial * g
                Q2, K2, M2, S2, gK2 = quotient(cand)
                if Q2 > Q * (1.0 + 1e-13):
                    accepted = True
                    break
                trial *= 0.5
            if not accepted:
                break
            prev, gprev = dense, g
            dense = cand / np.sqrt(K2 + M2)
            Q, K, M, S, gK = quotient(dense)
        else:
            stalled = True
        best_Q = max(best_Q, Q)
    if mu1 is None:
        mu1, _ = first_eigenvalue(grid, tol=1e-5)
    C = best_Q
    C_tilde = C**2 * (1.0 + 1.0 / mu1)
    rho_D = (p / (4.0 * C_tilde)) ** (1.0 / (p - 2.0))
    return EmbeddingReport(C_D=C, C_tilde=C_tilde, rho_D=rho_D, mu1=mu1,
                           p=p, ascent_stalled=stalled)


@dataclass
class PositivityReport:
    rho: float
    rho_D: float
    mu1: float
    min_energy: float
    bound: float
    ok: bool


def positivity_audit(grid: Grid, p: float, rho: float,
                     opts: SolverOptions | None = None,
                     report: EmbeddingReport | None = None) -> PositivityReport:
    """Below the mass threshold the constrained minimum exceeds rho^2 mu_1 / 4.

    The bound is checked with a 1% discretization allowance; the precondition
    rho <= rho_D uses the (one-sided) embedding estimate.
    """
    report = report or embedding_constant(grid, p)
    if rho > report.rho_D:
        raise ValueError(
            f"positivity audit needs rho <= rho_D ({rho:.3g} > {report.rho_D:.3g})"
        )
    res = minimize_constrained(grid, p, rho, opts=opts or SolverOptions(
        max_iters=4000, grad_tol=1e-6, restarts=2))
    bound = 0.99 * rho**2 * report.mu1 / 4.0
    return PositivityReport(rho=rho, rho_D=report.rho_D, mu1=report.mu1,
                            min_energy=res.energy.total, bound=bound,
                            ok=bool(res.energy.total >= bound))


@dataclass
class DivergenceRow:
    lam: float
    h: float
    mu1: float
    C_D: float
    C_tilde: float
    rho_D: float
    bump_quotient: float


@dataclass
class DivergenceReport:
    rows: list
    ratios: list
    rho_decreasing: bool
    scaled_lower_bound: float

    def consecutive_ratios_at_least(self, bound: float) -> bool:
        return all(r >= bound for r in self.ratios)


def divergence_audit(base: DomainSpec, lambdas, p: float,
                     cells_per_axis: int = 64,
                     opts: SolverOptions | None = None) -> DivergenceReport:
    """C~_(lambda D) along an increasing lambda list.

    Each scaled copy is gridded at ~cells_per_axis cells per axis (the cap
    forbids holding physical h fixed across a 8x dilation), and a fixed-size
    reference bump is evaluated on every grid as the lambda-independent lower
    bound for C_(lambda D).
    """
    lambdas = sorted(float(x) for x in lambdas)
    rows = []
    for lam in lambdas:
        spec = scale_domain(base, lam) if lam > 1 else base
        lo, hi = spec.bounding_box()
        width = float(np.max(hi - lo))
        cpu = min(cells_per_axis / width, (cell_cap() - 4) / width)
        grid = build_grid(spec, cells_per_unit=cpu)
        rep = embedding_constant(grid, p, opts=opts)
        bump = _reference_bump_quotient(grid, p, base)
        rows.append(DivergenceRow(lam=lam, h=grid.spacing, mu1=rep.mu1,
                                  C_D=rep.C_D, C_tilde=rep.C_tilde,
                                  rho_D=rep.rho_D, bump_quotient=bump))
    ratios = [rows[i + 1].C_tilde / rows[i].C_tilde for i in range(len(rows) - 1)]
    rho_dec = all(rows[i + 1].rho_D < rows[i].rho_D for i in range(len(rows) - 1))
    scaled = min(r.C_tilde / r.lam**2 for r in rows)
    return DivergenceReport(rows=rows, ratios=ratios, rho_decreasing=rho_dec,
                            scaled_lower_bound=scaled)


def _reference_bump_quotient(grid: Grid, p: float, base: DomainSpec) -> float:
    """Quotient of a fixed-size positive bump transplanted into the scaled set.

    The bump's integrals do not depend on lambda, so its quotient certifies a
    lambda-independent lower bound for C_(lambda D).
    """
    q = 4.0 / (4.0 - p)
    spec = grid.spec
    lo, hi = spec.bounding_box()
    center = (np.asarray(lo) + np.asarray(hi)) / 2
    width = 0.3 * base.inradius()
    pts = grid.points
    d2 = np.sum((pts - center) ** 2, axis=1)
    dense = np.zeros(grid.dims)
    dense[grid.mask] = np.exp(-d2 / (2 * width**2))
    K, _ = _neumann_h1(dense, grid.mask, grid.spacing)
    h3 = grid.cell_volume()
    M = float(np.sum(dense[grid.mask] ** 2)) * h3
    S = float(np.sum(dense[grid.mask] ** q)) * h3
    return S ** (1.0 / q) / np.sqrt(K + M)
