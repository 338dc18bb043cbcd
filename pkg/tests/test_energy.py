import numpy as np
import pytest

from splab.domains import DomainSpec, build_grid
from splab.elliptic import first_eigenvalue
from splab.energy import (EnergyBreakdown, energy_domain, energy_freespace,
                          gradient, multiplier)
from splab.fields import RadialField, ScalarField
from splab.minimize import project_mass
from splab.verify import run_energy

from conftest import rows_summary


def bump(grid, width=0.4):
    return ScalarField(grid, np.exp(-np.sum(grid.points**2, axis=1) / (2 * width**2)))


def test_zero_field(ball_grid_16):
    e = energy_domain(ScalarField.zeros(ball_grid_16), ball_grid_16, 2.5)
    assert (e.kinetic, e.nonlocal_, e.power, e.total) == (0, 0, 0, 0)


def test_total_is_stored_identity(ball_grid_16):
    e = energy_domain(bump(ball_grid_16), ball_grid_16, 2.7)
    assert e.total == e.kinetic + e.nonlocal_ - e.power


def test_p_range_enforced(ball_grid_16):
    u = bump(ball_grid_16)
    for bad_p in (2.0, 3.0, 1.5, 3.5):
        with pytest.raises(ValueError):
            energy_domain(u, ball_grid_16, bad_p)


def test_homogeneity(ball_grid_16):
    p = 2.5
    u = bump(ball_grid_16)
    e1 = energy_domain(u, ball_grid_16, p)
    t = 2.3
    et = energy_domain(ScalarField(ball_grid_16, t * u.values), ball_grid_16, p)
    assert et.kinetic == pytest.approx(t**2 * e1.kinetic, rel=1e-12)
    assert et.nonlocal_ == pytest.approx(t**4 * e1.nonlocal_, rel=1e-8)
    assert et.power == pytest.approx(t**p * e1.power, rel=1e-12)


def test_eigenfield_kinetic(ball_grid_16):
    mu1, ef = first_eigenvalue(ball_grid_16, tol=1e-8)
    e = energy_domain(project_mass(ef, 1.0), ball_grid_16, 2.5)
    assert e.kinetic == pytest.approx(mu1 / 2, rel=1e-8)


def test_gradient_zero_field(ball_grid_16):
    g = gradient(ScalarField.zeros(ball_grid_16), ball_grid_16, 2.5)
    assert np.all(g.values == 0.0)


def test_gradient_directional_derivative(ball_grid_16):
    grid = ball_grid_16
    rng = np.random.default_rng(7)
    h3 = grid.cell_volume()
    u = ScalarField(grid, bump(grid).values * (1 + 0.3 * rng.standard_normal(grid.n_inside)))
    v = ScalarField(grid, bump(grid, 0.5).values * rng.standard_normal(grid.n_inside))
    g = gradient(u, grid, 2.5)
    an = float(np.sum(g.values * v.values)) * h3
    for eps in (1e-3, 1e-4):
        ep = energy_domain(ScalarField(grid, u.values + eps * v.values), grid, 2.5).total
        em = energy_domain(ScalarField(grid, u.values - eps * v.values), grid, 2.5).total
        fd = (ep - em) / (2 * eps)
        assert fd == pytest.approx(an, rel=1e-5)


def test_multiplier_scaling_formula(ball_grid_16):
    grid = ball_grid_16
    p = 2.5
    u = project_mass(bump(grid), 0.7)
    e = energy_domain(u, grid, p)
    m1 = multiplier(u, grid, p)
    t = 1.9
    ut = ScalarField(grid, t * u.values)
    mt = multiplier(ut, grid, p)
    rho2 = u.mass()
    pred = (t**2 * 2 * e.kinetic + t**4 * 4 * e.nonlocal_
            - t**p * p * e.power) / (t**2 * rho2)
    assert mt.omega == pytest.approx(pred, rel=1e-9)
    assert m1.residual >= 0


def test_multiplier_zero_mass(ball_grid_16):
    with pytest.raises(ValueError):
        multiplier(ScalarField.zeros(ball_grid_16), ball_grid_16, 2.5)


def test_freespace_radial_uniform_gap():
    # free-space minus Dirichlet nonlocal term = (1/4) (4 pi / 9) for the
    # unit-mass-density uniform ball
    J = 4000
    rf = RadialField.from_function(1.0, J, lambda r: (r <= 1.0) * 1.0)
    e_free = energy_freespace(rf, 2.5)
    from splab.radial import RadialProblem

    prob = RadialProblem.from_field(rf, 2.5, potential="dirichlet")
    _, nl_dir, _, _ = prob.energy_terms(rf.values)
    assert e_free.nonlocal_ - nl_dir == pytest.approx(np.pi / 9, rel=1e-3)


def test_freespace_3d_padding_contract(ball_grid_16):
    u = bump(ball_grid_16)
    with pytest.raises(ValueError):
        energy_freespace(u, 2.5, pad_factor=1.5)


def test_freespace_zero(ball_grid_16):
    e = energy_freespace(ScalarField.zeros(ball_grid_16), 2.5)
    assert e.total == 0.0


def test_energy_suite_quick():
    rows = run_energy(quick=True, seed=0)
    assert all(r.ok for r in rows), rows_summary(rows)
