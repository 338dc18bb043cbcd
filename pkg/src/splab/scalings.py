"""Small-mass rescaling dictionary between the mass-rho ground state and the
unit-mass problem with a weighted nonlocal term.

w(x) = rho^(4 / (4 - 3(p-2))) v(rho^(2(p-2) / (4 - 3(p-2))) x) maps the
unit-mass minimizer v of the weighted functional (nonlocal weight rho^alpha)
to the mass-rho minimizer w of the plain functional; term by term,

    int |grad w|^2 = rho^gamma int |grad v|^2,
    int phi_w w^2  = rho^(alpha + gamma) int phi_v v^2,
    int |w|^p      = rho^gamma int |v|^p,
    rho^2 omega_w  = rho^gamma omega_v,

with alpha = 8(3-p)/(10-3p), gamma = (8 - 2(p-2))/(10-3p), both positive on
2 < p < 3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import RadialField
from .minimize import SolveResult, SolverOptions, radial_minimize


@dataclass(frozen=True)
class ScalingExponents:
    p: float
    alpha: float
    gamma: float
    a_u: float
    b_x: float


def exponents(p: float) -> ScalingExponents:
    """alpha, gamma and the amplitude/space rescaling exponents at this p."""
    if not (2.0 < p < 3.0):
        raise ValueError(f"p must lie in (2, 3), got {p}")
    denom = 10.0 - 3.0 * p
    a_u = 4.0 / (4.0 - 3.0 * (p - 2.0))
    b_x = 2.0 * (p - 2.0) / (4.0 - 3.0 * (p - 2.0))
    return ScalingExponents(
        p=float(p),
        alpha=8.0 * (3.0 - p) / denom,
        gamma=(8.0 - 2.0 * (p - 2.0)) / denom,
        a_u=a_u,
        b_x=b_x,
    )


def rescale(v: RadialField, rho: float, p: float, direction: str = "v_to_w") -> RadialField:
    """Apply the amplitude/space rescaling between v and w.

    v -> w: amplitude times rho^a_u, radius dilated by rho^-b_x.  The output
    mesh keeps the node count, so the inverse composes to the identity at the
    nodes exactly.
    """
    e = exponents(p)
    if direction == "v_to_w":
        amp, dil = rho**e.a_u, rho**e.b_x
    elif direction == "w_to_v":
        amp, dil = rho**(-e.a_u), rho**(-e.b_x)
    else:
        raise ValueError("direction must be 'v_to_w' or 'w_to_v'")
    # w(r) = amp * v(dil * r) on the mesh with outer radius scaled by 1/dil
    new_h = v.h / dil
    new_vals = amp * v.values.copy()
    return RadialField(new_vals, new_h)


@dataclass
class ScalingAuditRow:
    name: str
    lhs: float
    rhs: float
    rel_err: float
    ok: bool


@dataclass
class ScalingAuditReport:
    rho: float
    p: float
    rows: list
    w_result: SolveResult
    v_result: SolveResult

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.rows)


def scaling_audit(rho: float, p: float, truncation_radius: float = 48.0,
                  n_points: int = 3072, opts: SolverOptions | None = None,
                  tol_terms: float = 0.03, tol_multiplier: float = 0.05) -> ScalingAuditReport:
    """Solve both problems and verify the three term identities plus the
    multiplier relation rho^2 omega_w = rho^gamma omega_v (both negative)."""
    e = exponents(p)
    opts = opts or SolverOptions(max_iters=30_000, grad_tol=1e-8)
    w_res = radial_minimize(truncation_radius, p, rho, n_points, opts=opts,
                            potential="newton")
    v_res = radial_minimize(truncation_radius * rho**e.b_x, p, 1.0, n_points,
                            opts=opts, potential="newton", nl_weight=rho**e.alpha)
    kin_w, nl_w, pw_w = (w_res.energy.kinetic, w_res.energy.nonlocal_, w_res.energy.power)
    kin_v, nl_v, pw_v = (v_res.energy.kinetic, v_res.energy.nonlocal_, v_res.energy.power)
    rows = []

    def check(name, lhs, rhs, tol):
        rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
        rows.append(ScalingAuditRow(name, lhs, rhs, rel, bool(rel <= tol)))

    check("kinetic", 2 * kin_w, rho**e.gamma * 2 * kin_v, tol_terms)
    # v's stored nonlocal term already carries the rho^alpha weight
    check("nonlocal", 4 * nl_w, rho**e.gamma * 4 * nl_v, tol_terms)
    check("power", p * pw_w, rho**e.gamma * p * pw_v, tol_terms)
    check("multiplier", rho**2 * w_res.omega.omega,
          rho**e.gamma * v_res.omega.omega, tol_multiplier)
    rows.append(ScalingAuditRow("omega_w_negative", w_res.omega.omega, 0.0,
                                0.0, bool(w_res.omega.omega < 0)))
    rows.append(ScalingAuditRow("omega_v_negative", v_res.omega.omega, 0.0,
                                0.0, bool(v_res.omega.omega < 0)))
    return ScalingAuditReport(rho=rho, p=p, rows=rows, w_result=w_res, v_result=v_res)
