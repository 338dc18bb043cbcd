"""Property suites behind ``splab verify``: each suite audits one module's
identities at desk scale and returns rows in the common report schema.

The quick variants use coarser grids and fewer samples; tolerances are the
same.  Tests reuse these functions, so the CLI table and the pytest suite
agree by construction.
"""

from __future__ import annotations

import numpy as np

from .appendix import divergence_audit, embedding_constant, positivity_audit
from .domains import DomainSpec, build_grid, integrate, region, scale_domain
from .elliptic import (first_eigenvalue, laplacian, newton_potential_radial,
                       poisson_dirichlet, poisson_dirichlet_radial)
from .energy import energy_domain, energy_freespace, gradient, multiplier
from .fields import RadialField, ScalarField
from .greens import (pair_energy_regular, regular_part_ball,
                     regular_part_numeric, sup_regular_part)
from .minimize import SolverOptions, minimize_constrained, project_mass, radial_minimize
from .radial import RadialProblem
from .reports import AuditRow, rel_check, row
from .scalings import exponents, rescale, scaling_audit
from .topology import barycenter, sublevel_threshold, transplant, transplant_lattice


def _random_radial_bump(rng, outer, n_points=1536, rho=1.0):
    h = outer / n_points
    r = h * np.arange(n_points + 1)
    vals = np.zeros_like(r)
    for _ in range(3):
        c = rng.uniform(0.0, 0.55 * outer)
        s = rng.uniform(0.08 * outer, 0.25 * outer)
        vals += rng.uniform(0.2, 1.0) * np.exp(-((r - c) ** 2) / (2 * s * s))
    vals *= np.exp(-((r / (0.8 * outer)) ** 8))  # keep it compactly supported
    vals[-1] = 0.0
    f = RadialField(vals, h)
    return project_mass(f, rho)


def _sample_radial_on_grid(rf: RadialField, grid) -> ScalarField:
    rr = np.linalg.norm(grid.points, axis=1)
    return ScalarField(grid, rf.interp(rr))


# ----------------------------------------------------------------------
# greens

def run_greens(quick: bool = True, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    a = 1.0
    # image-charge scaling identity, exact arithmetic
    for lam in (2.0, 5.0):
        pts = rng.uniform(-0.4, 0.4, size=(8, 3))
        ys = rng.uniform(-0.4, 0.4, size=(8, 3))
        worst = 0.0
        for x, y in zip(pts, ys):
            h1 = regular_part_ball(x[None, :] * lam, y * lam, radius=lam * a)
            h0 = regular_part_ball(x[None, :], y, radius=a)
            worst = max(worst, abs(h1[0] - h0[0] / lam))
        rows.append(row("greens.scaling_identity", f"ball r={a}", lam,
                        worst, 0.0, 1e-12, worst <= 1e-12))
    # domain monotonicity of H on random pairs
    n_pairs = 100
    xs = rng.normal(size=(n_pairs, 3))
    xs = 0.9 * xs / np.maximum(np.linalg.norm(xs, axis=1, keepdims=True), 1e-9) \
        * rng.uniform(0, 1, size=(n_pairs, 1)) ** (1 / 3)
    ys = 0.9 * rng.uniform(-0.5, 0.5, size=(n_pairs, 3))
    viol = 0
    for x, y in zip(xs, ys):
        h_small = regular_part_ball(x[None, :], y, radius=1.0)
        h_big = regular_part_ball(x[None, :], y, radius=2.0)
        if not h_big[0] < h_small[0]:
            viol += 1
    rows.append(row("greens.monotonicity_H", "ball 1 vs 2", None,
                    viol, 0, 0, viol == 0))
    # numeric regular part vs image charge
    cpu = 20 if quick else 24
    grid = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=cpu)
    pts = grid.points
    rr = np.linalg.norm(pts, axis=1)
    inner = rr <= 0.7
    for y in (np.zeros(3), np.array([0.3, -0.2, 0.1])):
        col = regular_part_numeric(grid, y)
        exact = regular_part_ball(pts, y, radius=1.0)
        rel = float(np.max(np.abs(col.values[inner] - exact[inner]) / exact[inner]))
        rows.append(row("greens.numeric_vs_exact", f"ball y={y.round(2).tolist()}",
                        None, rel, 0.0, 0.03, rel <= 0.03))
        # nonnegativity at sampled cells
        rows.append(row("greens.nonnegative", f"ball y={y.round(2).tolist()}", None,
                        float(col.values.min()), 0.0, 1e-8,
                        col.values.min() >= -1e-8))
    # harmonicity: A h = 0 away from the boundary layer
    col = regular_part_numeric(grid, np.zeros(3))
    resid = laplacian(grid) @ col.values
    interior = ~grid.boundary[grid.mask]
    hmax = float(np.abs(resid[interior]).max())
    scale = float(np.abs(col.values).max()) / grid.spacing**2
    rows.append(row("greens.harmonic", "ball", None, hmax, 0.0, 1e-6 * scale,
                    hmax <= 1e-6 * scale))
    # symmetry of the numeric kernel
    n_sym = 5 if quick else 20
    cand = pts[rr < 0.8]
    sel = rng.choice(len(cand), size=2 * n_sym, replace=False)
    worst = 0.0
    for k in range(n_sym):
        x, y = cand[sel[2 * k]], cand[sel[2 * k + 1]]
        cx = regular_part_numeric(grid, x)
        cy = regular_part_numeric(grid, y)
        ix = int(np.argmin(np.sum((pts - y) ** 2, axis=1)))
        iy = int(np.argmin(np.sum((pts - x) ** 2, axis=1)))
        v1, v2 = cx.values[ix], cy.values[iy]
        worst = max(worst, abs(v1 - v2) / max(abs(v1), abs(v2)))
    rows.append(row("greens.symmetry", "ball", None, worst, 0.0, 0.02, worst <= 0.02))
    # uniform-ball pair energy and the relacion audit share one batch of solves
    ones = ScalarField(grid, np.ones(grid.n_inside))
    n_fields = 4 if quick else 10
    fields3d, radials = [], []
    for _ in range(n_fields):
        rf = _random_radial_bump(rng, outer=0.95, rho=1.0)
        u3 = project_mass(_sample_radial_on_grid(rf, grid), 1.0)
        fields3d.append(u3)
        radials.append(rf)
    pair_vals = pair_energy_regular([ones] + fields3d, grid,
                                    max_solves=280 if quick else 1000)
    target = 4 * np.pi / 9
    rows.append(rel_check("greens.pair_energy_uniform", "ball", None,
                          pair_vals[0], target, 0.05))
    # relation I(u; D) = I(u; R^3) - 1/4 iint H u^2 u^2
    rows.extend(_relation_rows(fields3d, radials, pair_vals[1:]))
    # sup of the regular part: margin family on the ball
    rep1 = sup_regular_part(grid, 0.3)
    target = 1.0 / (4 * np.pi * (1 - 0.7**2))
    rows.append(rel_check("greens.sup_margin", "ball delta=0.3", None,
                          rep1.M_D_delta, target, 0.05))
    rep2 = sup_regular_part(grid, 0.45)
    rows.append(row("greens.sup_margin_monotone", "ball", None, rep1.M_D_delta,
                    rep2.M_D_delta, None, rep1.M_D_delta >= rep2.M_D_delta))
    lam = 2.0
    grid2 = build_grid(scale_domain(DomainSpec.ball(radius=1.0), lam), cells_per_unit=cpu / 2)
    repl = sup_regular_part(grid2, lam * 0.3)
    rows.append(rel_check("greens.sup_scaling", "ball", lam,
                          repl.M_D_delta, rep1.M_D_delta / lam, 0.03))
    # translation invariance of the annulus regular part
    base = DomainSpec.annulus(inner=0.5, outer=1.0)
    cpu_a = 16 if quick else 24
    ga = build_grid(base, cells_per_unit=cpu_a)
    shifts = rng.uniform(-2, 2, size=(2 if quick else 3, 3))
    yloc = np.array([0.72, 0.0, 0.0])
    zloc = np.array([-0.7, 0.1, 0.0])
    c0 = regular_part_numeric(ga, yloc)
    i0 = int(np.argmin(np.sum((ga.points - zloc) ** 2, axis=1)))
    v0 = c0.values[i0]
    for sh in shifts:
        spec_t = DomainSpec.annulus(center=tuple(sh), inner=0.5, outer=1.0)
        gt = build_grid(spec_t, cells_per_unit=cpu_a)
        ct = regular_part_numeric(gt, yloc + sh)
        it_ = int(np.argmin(np.sum((gt.points - (zloc + sh)) ** 2, axis=1)))
        rel = abs(ct.values[it_] - v0) / abs(v0)
        rows.append(row("greens.translation_invariance", "annulus", None,
                        rel, 0.0, 1e-6, rel <= 1e-6))
    return rows


def _relation_rows(fields3d, radials, pair_vals, p: float = 2.5) -> list:
    """relacion audit given precomputed pair energies."""
    rows = []
    for u3, rf, pv in zip(fields3d, radials, pair_vals):
        grid = u3.grid
        eD = energy_domain(u3, grid, p)
        # free-space energy: same grid kinetic/power, radial Newton nonlocal
        prob = RadialProblem.from_field(rf, p, potential="newton")
        phiN = prob.solve_potential(rf.values**2)
        nl_free = 0.25 * float(np.sum(phiN * rf.values**2 * prob.w))
        i_free = eD.kinetic + nl_free - eD.power
        lhs = eD.total
        rhs = i_free - 0.25 * pv
        rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
        rows.append(row("greens.relacion", "ball", None, lhs, rhs, 0.03, rel <= 0.03))
    return rows


# ----------------------------------------------------------------------
# energy

def run_energy(quick: bool = True, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    p = 2.5
    cpu = 12 if quick else 16
    ball = DomainSpec.ball(radius=1.0)
    grid = build_grid(ball, cells_per_unit=cpu)

    # zero field
    z = ScalarField.zeros(grid)
    ez = energy_domain(z, grid, p)
    rows.append(row("energy.zero_field", "ball", None, ez.total, 0.0, 0.0,
                    ez.total == 0.0 and ez.kinetic == 0.0 and ez.power == 0.0))

    # eigenfield kinetic = mu1 / 2 at unit mass
    mu1, ef = first_eigenvalue(grid, tol=1e-7)
    ef1 = project_mass(ef, 1.0)
    e_eig = energy_domain(ef1, grid, p)
    rows.append(rel_check("energy.eigen_kinetic", "ball", None,
                          e_eig.kinetic, mu1 / 2, 1e-6))

    # homogeneity of the three terms
    u = _sample_radial_on_grid(_random_radial_bump(rng, 0.9), grid)
    e1 = energy_domain(u, grid, p)
    t = 1.7
    et = energy_domain(ScalarField(grid, t * u.values), grid, p)
    ok = (abs(et.kinetic - t**2 * e1.kinetic) <= 1e-10 * et.kinetic
          and abs(et.nonlocal_ - t**4 * e1.nonlocal_) <= 1e-8 * et.nonlocal_
          and abs(et.power - t**p * e1.power) <= 1e-10 * et.power)
    rows.append(row("energy.homogeneity", "ball", None, 1.0 if ok else 0.0,
                    1.0, 0.0, ok))

    # free-space vs Dirichlet nonlocal gap for the uniform ball (radial route)
    J = 2000
    rf = RadialField.from_function(1.0, J, lambda r: (r <= 1.0) * 1.0)
    phiN = newton_potential_radial(rf)
    phiD = poisson_dirichlet_radial(RadialField(rf.values**2, rf.h))
    w = rf.mass_weights
    gap = 0.25 * float(np.sum((phiN.values - phiD.values) * rf.values**2 * w))
    rows.append(rel_check("energy.freespace_gap_uniform", "ball", None,
                          gap, 0.25 * 4 * np.pi / 9, 0.01))

    # energy_freespace on a 3D field vs radial reference
    rfb = _random_radial_bump(rng, 0.8, rho=1.0)
    u3 = project_mass(_sample_radial_on_grid(rfb, grid), 1.0)
    efree = energy_freespace(u3, p, pad_factor=3.0)
    prob = RadialProblem.from_field(rfb, p, potential="newton")
    phiN2 = prob.solve_potential(rfb.values**2)
    nl_ref = 0.25 * float(np.sum(phiN2 * rfb.values**2 * prob.w))
    rows.append(rel_check("energy.freespace_nonlocal", "ball", None,
                          efree.nonlocal_, nl_ref, 0.05))

    # gradient finite-difference consistency
    n_checks = 5 if quick else 20
    worst = 0.0
    h3 = grid.cell_volume()
    for _ in range(n_checks):
        uu = _sample_radial_on_grid(_random_radial_bump(rng, 0.9), grid)
        vv = ScalarField(grid, rng.standard_normal(grid.n_inside)
                         * np.exp(-3 * np.sum(grid.points**2, axis=1)))
        g = gradient(uu, grid, p)
        an = float(np.sum(g.values * vv.values)) * h3
        eps = 1e-4
        ep = energy_domain(ScalarField(grid, uu.values + eps * vv.values), grid, p).total
        em = energy_domain(ScalarField(grid, uu.values - eps * vv.values), grid, p).total
        fd = (ep - em) / (2 * eps)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    rows.append(row("energy.gradient_fd", "ball", None, worst, 0.0, 0.01,
                    worst <= 0.01))

    # coercivity: shrinking bumps at fixed mass drive the total up
    totals = []
    for tshrink in (1.0, 2.0, 4.0, 8.0, 16.0):
        vals = np.exp(-tshrink**2 * np.sum(grid.points**2, axis=1) / 0.08)
        ub = project_mass(ScalarField(grid, vals), 0.5)
        totals.append(energy_domain(ub, grid, p).total)
    increasing = all(b > a for a, b in zip(totals[1:], totals[2:]))
    rows.append(row("energy.coercive", "ball", None, totals[-1], totals[0], None,
                    increasing and totals[-1] > 10 * abs(totals[0])))

    # domain monotonicity I(u; D1) < I(u; D2) on aligned concentric balls
    g1 = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=8)
    g2 = build_grid(DomainSpec.ball(radius=1.5), cells_per_unit=8)
    bump = _random_radial_bump(rng, 0.7, rho=1.0)
    u1 = project_mass(_sample_radial_on_grid(bump, g1), 1.0)
    u2 = project_mass(_sample_radial_on_grid(bump, g2), 1.0)
    I1 = energy_domain(u1, g1, p).total
    I2 = energy_domain(u2, g2, p).total
    rows.append(row("energy.domain_monotonicity", "ball 1 in 1.5", None,
                    I1, I2, None, I1 < I2))

    # multiplier formula on the eigenfield
    me = multiplier(ef1, grid, p)
    e_terms = energy_domain(ef1, grid, p)
    pred = mu1 + (4 * e_terms.nonlocal_ - p * e_terms.power) / 1.0
    rows.append(rel_check("energy.multiplier_eigen", "ball", None,
                          me.omega, pred, 1e-6))
    return rows


# ----------------------------------------------------------------------
# topology

def run_topology(quick: bool = True, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    p, rho, r = 2.5, 0.5, 1.0
    lam = 4.0 if quick else 8.0
    omega_spec = DomainSpec.box(lo=(-2, -2, -2), hi=(2, 2, 2))
    lam_omega = scale_domain(omega_spec, lam)
    cpu = 2.0 if quick else 2.5
    grid = build_grid(lam_omega, cells_per_unit=cpu)
    h = grid.spacing

    # radial symmetry: beta of a centered bump
    x0 = np.array([0.8, -0.4, 0.2])
    vals = np.exp(-np.sum((grid.points - x0) ** 2, axis=1) / (2 * 1.5**2))
    rep = barycenter(ScalarField(grid, vals), grid)
    err = float(np.linalg.norm(rep.beta - x0))
    rows.append(row("topology.beta_radial", "box", lam, err, 0.0, h, err <= h))

    # invariance under scaling of u
    rep2 = barycenter(ScalarField(grid, 3.7 * vals), grid)
    dev = float(np.linalg.norm(rep2.beta - rep.beta))
    rows.append(row("topology.beta_scale_invariant", "box", lam, dev, 0.0,
                    1e-12, dev <= 1e-12))

    # translation covariance on a shifted grid
    z = np.array([1.0, 2.0, -1.0])
    shifted = DomainSpec.box(lo=(-2 + z[0] / lam, -2 + z[1] / lam, -2 + z[2] / lam),
                             hi=(2 + z[0] / lam, 2 + z[1] / lam, 2 + z[2] / lam))
    gs = build_grid(scale_domain(shifted, lam), cells_per_unit=cpu)
    vals_s = np.exp(-np.sum((gs.points - (x0 + z)) ** 2, axis=1) / (2 * 1.5**2))
    rep3 = barycenter(ScalarField(gs, vals_s), gs)
    dev = float(np.linalg.norm(rep3.beta - (rep.beta + z)))
    rows.append(row("topology.beta_translation", "box", lam, dev, 0.0, 1e-9,
                    dev <= 1e-9))

    # transplant machinery: radial ground state of B_{lam r}
    wstar = radial_minimize(lam * r, p, rho, n_points=max(512, int(lam * 96)),
                            opts=SolverOptions(max_iters=20000, grad_tol=3e-6),
                            potential="dirichlet")
    b_star = wstar.energy.total
    Mterm = sup_regular_part(build_grid(DomainSpec.ball(radius=r), cells_per_unit=25),
                             delta=0.1 * r).M_D_delta
    thr = sublevel_threshold(b_star, lam, rho, Mterm, delta=0.1 * r)
    # lam * Omega_r^{+/-} are the lam-dilations of the offset sets, i.e. the
    # lam*Omega grid offset by lam*r
    eroded = region(lam_omega, -lam * r)
    dilated = region(lam_omega, +lam * r)
    spacing = max(h, 0.45 * lam)
    lattice = transplant_lattice(eroded, spacing)
    if quick and len(lattice) > 27:
        lattice = lattice[rng.choice(len(lattice), size=27, replace=False)]
    worst_beta = 0.0
    worst_energy = -np.inf
    results = []
    for y in lattice:
        tp = transplant(wstar.u, y, grid, eroded, rho=rho)
        e = energy_domain(tp, grid, p)
        bc = barycenter(tp, grid)
        worst_beta = max(worst_beta, float(np.linalg.norm(bc.beta - y)))
        worst_energy = max(worst_energy, e.total)
        results.append((e.total, bc.beta))
    rows.append(row("topology.beta_of_transplant", "box", lam, worst_beta, 0.0,
                    2 * h, worst_beta <= 2 * h))
    rows.append(row("topology.transplant_below_threshold", "box", lam,
                    worst_energy, thr.value, None, worst_energy < thr.value))
    mass_err = abs(transplant(wstar.u, lattice[0], grid, eroded, rho=rho).mass()
                   - rho**2) / rho**2
    rows.append(row("topology.transplant_mass", "box", lam, mass_err, 0.0,
                    1e-10, mass_err <= 1e-10))

    # containment of sublevel fields
    from .topology import containment_audit as _ca

    class _R:
        def __init__(self, E, b):
            self.energy = type("E", (), {"total": E})()
            self.barycenter = b

    audit = _ca([_R(E, b) for E, b in results], dilated, thr.value, slack=2 * h)
    rows.append(row("topology.containment", "box", lam, float(audit.all_contained),
                    1.0, None, audit.all_contained))

    # high-energy outsider is skipped by the audit precondition
    far = np.array([lam * 2.0 + 2 * r, 0, 0])  # outside Omega_r^+ at scale lam
    vals_o = np.exp(-np.sum((grid.points - grid.points[np.argmax(grid.points[:, 0])])**2,
                            axis=1) / (2 * (2 * h) ** 2))
    outsider = project_mass(ScalarField(grid, vals_o + 1e-12), rho)
    e_out = energy_domain(outsider, grid, p)
    audit2 = _ca([_R(e_out.total, barycenter(outsider, grid).beta)], dilated,
                 thr.value, slack=2 * h)
    rows.append(row("topology.outsider_skipped", "box", lam,
                    e_out.total, thr.value, None,
                    e_out.total > thr.value and audit2.skipped == 1))

    # half-annulus concentration pushes the barycenter outward
    ann = scale_domain(DomainSpec.annulus(inner=r, outer=3.0), lam)
    ga = build_grid(ann, cells_per_unit=max(cpu, 3.0 / lam * 4))
    yc = np.array([lam * 1.6, 0.0, 0.0])
    vals_a = np.exp(-np.sum((ga.points - yc) ** 2, axis=1) / (2 * (0.35 * lam) ** 2))
    ba = barycenter(project_mass(ScalarField(ga, vals_a), rho), ga)
    bound = (r / (2 * 3.0)) * lam * r * 0.9
    rows.append(row("topology.half_annulus_beta", "annulus", lam,
                    float(np.linalg.norm(ba.beta)), bound, None,
                    np.linalg.norm(ba.beta) >= bound))
    return rows


# ----------------------------------------------------------------------
# scalings

def run_scalings(quick: bool = True, seed: int = 0) -> list:
    rows = []
    e = exponents(2.5)
    rows.append(row("scalings.alpha_25", "p=2.5", None, e.alpha, 1.6, 0.0,
                    abs(e.alpha - 1.6) < 1e-14))
    rows.append(row("scalings.gamma_25", "p=2.5", None, e.gamma, 2.8, 0.0,
                    abs(e.gamma - 2.8) < 1e-14))
    rows.append(row("scalings.amplitude_exp", "p=2.5", None, e.a_u, 1.6, 0.0,
                    abs(e.a_u - 1.6) < 1e-14))
    rows.append(row("scalings.space_exp", "p=2.5", None, e.b_x, 0.4, 0.0,
                    abs(e.b_x - 0.4) < 1e-14))
    ps = np.linspace(2.02, 2.98, 20)
    ok = all(abs(2 * exponents(p).a_u - 3 * exponents(p).b_x - 2.0) < 1e-12 for p in ps)
    rows.append(row("scalings.mass_exponent_identity", "p grid", None,
                    1.0 if ok else 0.0, 1.0, 0.0, ok))
    ps50 = np.linspace(2.01, 2.99, 50)
    pos = all(exponents(p).alpha > 0 and exponents(p).gamma > 0 for p in ps50)
    rows.append(row("scalings.positive_exponents", "p grid", None,
                    1.0 if pos else 0.0, 1.0, 0.0, pos))
    # round trip and mass scaling of the rescaling map
    rng = np.random.default_rng(seed)
    v = _random_radial_bump(rng, 10.0, n_points=1024, rho=1.0)
    w = rescale(v, 0.5, 2.5, "v_to_w")
    back = rescale(w, 0.5, 2.5, "w_to_v")
    rt = float(np.max(np.abs(back.values - v.values)))
    rows.append(row("scalings.round_trip", "radial", None, rt, 0.0, 1e-8, rt <= 1e-8))
    rows.append(rel_check("scalings.mass_map", "radial", None, w.mass(), 0.25, 1e-10))
    # identity at rho = 1 is the identity map
    w1 = rescale(v, 1.0, 2.5, "v_to_w")
    ident = float(np.max(np.abs(w1.values - v.values))) + abs(w1.h - v.h)
    rows.append(row("scalings.identity_at_rho1", "radial", None, ident, 0.0,
                    0.0, ident == 0.0))
    # term-by-term audit
    rhos = (0.5,) if quick else (0.25, 0.5)
    for rho in rhos:
        rep = scaling_audit(rho, 2.5,
                            truncation_radius=40.0 if quick else 56.0,
                            n_points=2048 if quick else 3072,
                            opts=SolverOptions(max_iters=25000, grad_tol=3e-6))
        for r_ in rep.rows:
            rows.append(row(f"scalings.{r_.name}", f"rho={rho}", None,
                            r_.lhs, r_.rhs, r_.rel_err, r_.ok))
    return rows


# ----------------------------------------------------------------------
# appendix

def run_appendix(quick: bool = True, seed: int = 0) -> list:
    rows = []
    p = 2.5
    # constant test function on the unit-volume box gives quotient 1
    box = DomainSpec.box(lo=(0, 0, 0), hi=(1, 1, 1))
    gb = build_grid(box, cells_per_unit=8 if quick else 12)
    rep_box = embedding_constant(gb, p)
    rows.append(row("appendix.constant_lower_bound", "box vol 1", None,
                    rep_box.C_D, 1.0, None, rep_box.C_D >= 1.0 - 1e-9))
    # assembly arithmetic
    ctl = rep_box.C_D**2 * (1 + 1 / rep_box.mu1)
    rows.append(rel_check("appendix.c_tilde_assembly", "box", None,
                          rep_box.C_tilde, ctl, 1e-12))
    rows.append(rel_check("appendix.rho_formula", "box", None, rep_box.rho_D,
                          (p / (4 * rep_box.C_tilde)) ** (1 / (p - 2)), 1e-12))
    # refinement monotonicity of the found constant
    ball = DomainSpec.ball(radius=1.0)
    g_coarse = build_grid(ball, cells_per_unit=8)
    g_fine = build_grid(ball, cells_per_unit=16)
    c_coarse = embedding_constant(g_coarse, p).C_D
    c_fine = embedding_constant(g_fine, p).C_D
    rows.append(row("appendix.refinement_monotone", "ball", None, c_fine,
                    c_coarse, 0.01, c_fine >= c_coarse * 0.99))
    # positivity below the threshold
    gball = build_grid(ball, cells_per_unit=12 if quick else 16)
    rep_ball = embedding_constant(gball, p)
    pos = positivity_audit(gball, p, rep_ball.rho_D / 2, report=rep_ball)
    rows.append(row("appendix.positivity", "ball", None, pos.min_energy,
                    pos.bound, None, pos.ok))
    # small-mass linear limit: min energy / rho^2 -> mu1 / 2
    tiny = 1e-3
    res_tiny = minimize_constrained(gball, p, tiny,
                                    opts=SolverOptions(max_iters=3000, grad_tol=1e-9))
    ratio = res_tiny.energy.total / tiny**2
    rows.append(rel_check("appendix.linear_limit", "ball", None, ratio,
                          rep_ball.mu1 / 2, 0.05))
    # divergence of C~ on expanding balls
    base = DomainSpec.ball(radius=12.0)
    lams = (1.0, 2.0) if quick else (1.0, 2.0, 4.0, 8.0)
    div = divergence_audit(base, lams, p, cells_per_axis=40 if quick else 64)
    for lam, ratio_ in zip(lams[1:], div.ratios):
        rows.append(row("appendix.c_tilde_ratio", "ball r=12", lam, ratio_, 3.5,
                        None, ratio_ >= 3.5))
    rows.append(row("appendix.rho_decreasing", "ball r=12", None,
                    1.0 if div.rho_decreasing else 0.0, 1.0, 0.0,
                    div.rho_decreasing))
    bumps = [r.bump_quotient for r in div.rows]
    spread = (max(bumps) - min(bumps)) / max(bumps)
    rows.append(row("appendix.fixed_bump_invariant", "ball r=12", None, spread,
                    0.0, 0.05, spread <= 0.05))
    rows.append(row("appendix.scaled_lower_bound", "ball r=12", None,
                    div.scaled_lower_bound, 0.0, None, div.scaled_lower_bound > 0))
    # rho_(lambda D) decay envelope
    decay_ok = all(
        div.rows[i + 1].rho_D <= div.rows[0].rho_D
        * (div.rows[i + 1].lam / div.rows[0].lam) ** (-2 / (p - 2)) * 1.3
        for i in range(len(div.rows) - 1)
    )
    rows.append(row("appendix.rho_decay_envelope", "ball r=12", None,
                    1.0 if decay_ok else 0.0, 1.0, 0.0, decay_ok))
    return rows


# ----------------------------------------------------------------------

SUITES = {
    "greens": run_greens,
    "energy": run_energy,
    "topology": run_topology,
    "scalings": run_scalings,
    "appendix": run_appendix,
}


def run_suite(name: str, quick: bool = True, seed: int = 0) -> list:
    if name == "all":
        rows = []
        for key in SUITES:
            rows.extend(SUITES[key](quick=quick, seed=seed))
        return rows
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return SUITES[name](quick=quick, seed=seed)
