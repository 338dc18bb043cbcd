"""Radial discretization of the constrained energy on balls and truncated space.

Fields live on the uniform mesh r_j = j * h.  Quadrature is the trapezoid
rule in r with the 4 pi r^2 volume factor; the kinetic term integrates the
squared forward difference against the interval-midpoint shell area.  With
these choices the L2(w) representation of the first variation is exactly

    g = -Delta_r u + nl_weight * phi u - |u|^(p-2) u,

which makes finite-difference checks of the gradient pass to O(eps^2).

Degrees of freedom are u_1 .. u_(J-1); regularity ties u_0 = u_1 (so the
first interval carries no gradient) and the Dirichlet/truncation condition
fixes u_J = 0.
"""

from __future__ import annotations

import numpy as np

from .elliptic import newton_potential_values
from .fields import RadialField


def odd_power(u: np.ndarray, q: float) -> np.ndarray:
    """sign(u) |u|^q, with the value 0 at u = 0 (continuous for q > 0)."""
    return np.sign(u) * np.abs(u) ** q


class RadialProblem:
    """Energy, gradient and multiplier for radial fields on [0, a]."""

    def __init__(self, outer_radius: float, n_points: int, p: float, rho: float,
                 potential: str = "dirichlet", nl_weight: float = 1.0):
        if potential not in ("dirichlet", "newton"):
            raise ValueError("potential must be 'dirichlet' or 'newton'")
        self.a = float(outer_radius)
        self.J = int(n_points)
        self.p = float(p)
        self.rho = float(rho)
        self.potential = potential
        self.nl_weight = float(nl_weight)
        self.h = self.a / self.J
        self.r = self.h * np.arange(self.J + 1)
        tau = np.ones(self.J + 1)
        tau[0] = tau[-1] = 0.5
        self.w = 4.0 * np.pi * self.r**2 * self.h * tau
        rmid = 0.5 * (self.r[1:] + self.r[:-1])
        self.wg = 4.0 * np.pi * rmid**2 * self.h

    @staticmethod
    def from_field(u: RadialField, p: float, potential: str = "dirichlet",
                   nl_weight: float = 1.0, rho: float | None = None) -> "RadialProblem":
        rho = np.sqrt(u.mass()) if rho is None else rho
        return RadialProblem(u.outer_radius, len(u.values) - 1, p, rho,
                             potential=potential, nl_weight=nl_weight)

    # -- constraint ------------------------------------------------------
    def apply_ties(self, u: np.ndarray) -> np.ndarray:
        u[0] = u[1]
        u[-1] = 0.0
        return u

    def project(self, u: np.ndarray) -> np.ndarray:
        m = float(np.sum(u * u * self.w))
        if m <= 0:
            raise ValueError("cannot mass-project the zero field")
        return u * (self.rho / np.sqrt(m))

    def mass(self, u: np.ndarray) -> float:
        return float(np.sum(u * u * self.w))

    # -- energy ----------------------------------------------------------
    def solve_potential(self, u2: np.ndarray) -> np.ndarray:
        phi = newton_potential_values(self.r, self.h, u2)
        if self.potential == "dirichlet":
            phi = phi - phi[-1]
        return phi

    def energy_terms(self, u: np.ndarray):
        d = np.diff(u) / self.h
        kin = 0.5 * float(np.sum(d * d * self.wg))
        u2 = u * u
        phi = self.solve_potential(u2)
        nl = 0.25 * self.nl_weight * float(np.sum(phi * u2 * self.w))
        pw = (1.0 / self.p) * float(np.sum(np.abs(u) ** self.p * self.w))
        return kin, nl, pw, phi

    def energy(self, u: np.ndarray) -> float:
        kin, nl, pw, _ = self.energy_terms(u)
        return kin + nl - pw

    def energy_extra(self, u: np.ndarray) -> float:
        return 0.0

    # -- first variation ---------------------------------------------------
    def gradient(self, u: np.ndarray, phi: np.ndarray) -> np.ndarray:
        d = np.diff(u) / self.h
        flux = d * self.wg / self.h
        gk = np.zeros_like(u)
        gk[1:] += flux
        gk[:-1] -= flux
        g = np.zeros_like(u)
        g[1:-1] = (
            gk[1:-1] / self.w[1:-1]
            + self.nl_weight * phi[1:-1] * u[1:-1]
            - odd_power(u[1:-1], self.p - 1.0)
        )
        g[0] = g[1]
        return g

    def tangential(self, g: np.ndarray, u: np.ndarray) -> np.ndarray:
        gu = float(np.sum(g * u * self.w))
        gT = g - (gu / self.rho**2) * u
        gT[0] = gT[1]
        gT[-1] = 0.0
        return gT

    def norm(self, v: np.ndarray) -> float:
        return float(np.sqrt(np.sum(v * v * self.w)))

    def multiplier(self, u: np.ndarray, phi: np.ndarray):
        d = np.diff(u) / self.h
        grad2 = float(np.sum(d * d * self.wg))
        phiu2 = self.nl_weight * float(np.sum(phi * u * u * self.w))
        powp = float(np.sum(np.abs(u) ** self.p * self.w))
        omega = (grad2 + phiu2 - powp) / self.rho**2
        g = self.gradient(u, phi)
        res = self.norm(self.apply_ties((g - omega * u).copy()))
        return omega, res

    def field(self, u: np.ndarray) -> RadialField:
        return RadialField(u.copy(), self.h)
