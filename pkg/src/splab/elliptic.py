"""Dirichlet Poisson solves, the first Laplacian eigenvalue, and radial potentials.

The 3D operator is the 7-point Laplacian on the masked-in cells with
homogeneous Dirichlet data imposed by zeroing masked-out neighbors; it is
symmetric positive definite and all solves use conjugate gradients with a
Jacobi preconditioner.  Radial potentials are evaluated by trapezoid
quadrature of the explicit kernels, which keeps the discrete nonlocal energy
self-adjoint with respect to the radial mass weights.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domains import Grid
from .errors import NumericError
from .fields import RadialField, ScalarField

def laplacian(grid: Grid) -> sp.csr_matrix:
    """7-point -Delta_h on masked-in cells (SPD), cached on the grid object."""
    A = getattr(grid, "_laplacian_matrix", None)
    if A is not None:
        return A
    h2 = grid.spacing**2
    idx = grid.inside_index
    mask = grid.mask
    n = grid.n_inside
    rows, cols = [], []
    for axis in range(3):
        for shift in (1, -1):
            nb = np.roll(idx, shift, axis=axis)
            edge = [slice(None)] * 3
            edge[axis] = 0 if shift == 1 else -1
            nb = nb.copy()
            nb[tuple(edge)] = -1
            both = mask & (nb >= 0)
            rows.append(idx[both])
            cols.append(nb[both])
    rows = np.concatenate(rows + [np.arange(n)])
    cols = np.concatenate(cols + [np.arange(n)])
    vals = np.concatenate([np.full(rows.size - n, -1.0 / h2), np.full(n, 6.0 / h2)])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    grid._laplacian_matrix = A
    return A


def _cg(A, b, tol, x0=None, maxiter=50_000, history_stride=50):
    """CG with Jacobi preconditioning and a sampled residual history."""
    if not np.any(b):
        return np.zeros_like(b), 0
    dinv = 1.0 / A.diagonal()
    M = spla.LinearOperator(A.shape, matvec=lambda v: dinv * v)
    history = []
    bnorm = np.linalg.norm(b)
    count = [0]

    def cb(xk):
        count[0] += 1
        if count[0] % history_stride == 0:
            history.append(float(np.linalg.norm(b - A @ xk) / bnorm))

    x, info = spla.cg(A, b, x0=x0, rtol=tol, atol=0.0, maxiter=maxiter, M=M, callback=cb)
    if info != 0:
        history.append(float(np.linalg.norm(b - A @ x) / bnorm))
        raise NumericError(
            f"CG did not reach rtol={tol} within {maxiter} iterations "
            f"(final relative residual {history[-1]:.3e})",
            residual_history=history,
        )
    return x, count[0]


def poisson_dirichlet(source: ScalarField, grid: Grid | None = None,
                      tol: float = 1e-10, x0: np.ndarray | None = None) -> ScalarField:
    """Solve -Delta_h phi = source with phi = 0 outside the mask."""
    grid = grid or source.grid
    if source.grid is not grid:
        raise ValueError("source is not defined on the given grid")
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = laplacian(grid)
    x, _ = _cg(A, source.values, tol, x0=x0)
    return ScalarField(grid, x)


def first_eigenvalue(grid: Grid, tol: float = 1e-7, max_outer: int = 200):
    """Smallest Dirichlet eigenvalue of -Delta_h by inverse power iteration.

    Each outer step is one (warm-started, inexact) CG solve.  Returns
    (mu1, eigenfield) with the eigenfield at unit L2 mass and
    ||A u - mu1 u||_L2 <= tol * mu1.
    """
    A = laplacian(grid)
    h3 = grid.cell_volume()
    x = np.ones(grid.n_inside)
    x /= np.linalg.norm(x)
    mu = float(x @ (A @ x))
    inner_tol = 1e-4
    residuals = []
    for _ in range(max_outer):
        y, _ = _cg(A, x, inner_tol, x0=x / mu)
        y /= np.linalg.norm(y)
        mu = float(y @ (A @ y))
        res = float(np.linalg.norm(A @ y - mu * y))
        residuals.append(res)
        x = y
        if res <= tol * mu:
            u = x / np.sqrt(h3)  # unit L2 mass
            return mu, ScalarField(grid, u)
        inner_tol = max(1e-12, min(1e-4, 0.05 * res / mu))
    raise NumericError(
        f"inverse power iteration stagnated at residual {residuals[-1]:.3e}",
        residual_history=residuals,
    )


# ----------------------------------------------------------------------
# radial potentials (trapezoid quadrature on uniform meshes)

def _cumtrapz0(y: np.ndarray, h: float) -> np.ndarray:
    """Cumulative trapezoid from 0 with a leading zero."""
    out = np.empty(len(y))
    out[0] = 0.0
    np.cumsum((y[1:] + y[:-1]) * (0.5 * h), out=out[1:])
    return out


def newton_potential_values(r: np.ndarray, h: float, source: np.ndarray) -> np.ndarray:
    """phi(r) = (1/r) int_0^r s^2 f ds + int_r^inf s f ds for given f >= any sign."""
    F = _cumtrapz0(r * r * source, h)
    G = _cumtrapz0(r * source, h)
    phi = np.empty_like(F)
    phi[1:] = F[1:] / r[1:] + (G[-1] - G[1:])
    phi[0] = G[-1]
    return phi


def newton_potential_radial(u: RadialField) -> RadialField:
    """Whole-space potential of the density u^2: solves -Delta phi = u^2 in R^3."""
    phi = newton_potential_values(u.r, u.h, u.values**2)
    return RadialField(phi, u.h)


def poisson_dirichlet_radial(source: RadialField, outer_radius: float | None = None) -> RadialField:
    """Solve -(r^2 phi')' = r^2 * source with phi(a) = 0 by double quadrature.

    Equals the whole-space potential of ``source`` minus its value at the
    outer radius (the two differ by the constant F(a)/a on [0, a]).
    """
    a = outer_radius if outer_radius is not None else source.outer_radius
    if abs(a - source.outer_radius) > 1e-12 * max(1.0, a):
        raise ValueError("outer radius must match the source mesh")
    phi = newton_potential_values(source.r, source.h, source.values)
    return RadialField(phi - phi[-1], source.h)
