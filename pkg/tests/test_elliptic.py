import numpy as np
import pytest

from splab.domains import DomainSpec, build_grid
from splab.elliptic import (_cg, first_eigenvalue, laplacian,
                            newton_potential_radial, poisson_dirichlet,
                            poisson_dirichlet_radial)
from splab.errors import NumericError
from splab.fields import RadialField, ScalarField


def test_poisson_unit_source_ball(ball_grid_16):
    grid = ball_grid_16
    phi = poisson_dirichlet(ScalarField(grid, np.ones(grid.n_inside)), grid)
    r = np.linalg.norm(grid.points, axis=1)
    err = np.abs(phi.values - (1 - r**2) / 6).max()
    assert err <= 0.3 * grid.spacing


def test_poisson_zero_source(ball_grid_16):
    grid = ball_grid_16
    phi = poisson_dirichlet(ScalarField.zeros(grid), grid)
    assert np.all(phi.values == 0.0)


def test_poisson_maximum_principle(ball_grid_16):
    grid = ball_grid_16
    rng = np.random.default_rng(0)
    src = ScalarField(grid, rng.random(grid.n_inside))
    phi = poisson_dirichlet(src, grid)
    assert phi.values.min() >= 0.0


def test_poisson_self_adjoint(ball_grid_16):
    grid = ball_grid_16
    rng = np.random.default_rng(1)
    u = rng.standard_normal(grid.n_inside)
    v = rng.standard_normal(grid.n_inside)
    phi_u = poisson_dirichlet(ScalarField(grid, u**2), grid).values
    phi_v = poisson_dirichlet(ScalarField(grid, v**2), grid).values
    lhs = np.sum(phi_u * v**2)
    rhs = np.sum(phi_v * u**2)
    assert abs(lhs - rhs) <= 1e-8 * max(abs(lhs), abs(rhs))


def test_poisson_energy_identity(ball_grid_16):
    grid = ball_grid_16
    rng = np.random.default_rng(2)
    vals = np.exp(-4 * np.sum(grid.points**2, axis=1)) * (1 + 0.2 * rng.random(grid.n_inside))
    phi = poisson_dirichlet(ScalarField(grid, vals**2), grid)
    h3 = grid.cell_volume()
    A = laplacian(grid)
    lhs = float(phi.values @ (A @ phi.values)) * h3  # int |grad phi|^2
    rhs = float(np.sum(phi.values * vals**2)) * h3
    assert abs(lhs - rhs) <= 2e-8 * abs(rhs)


def test_nonlocal_eigenvalue_bound(ball_grid_16):
    # int phi_u u^2 <= mu1^-1 (int |grad u|^2)^2
    grid = ball_grid_16
    mu1, _ = first_eigenvalue(grid, tol=1e-6)
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(grid.n_inside) * np.exp(-np.sum(grid.points**2, axis=1))
    phi = poisson_dirichlet(ScalarField(grid, vals**2), grid)
    h3 = grid.cell_volume()
    A = laplacian(grid)
    nonlocal_ = float(np.sum(phi.values * vals**2)) * h3
    grad2 = float(vals @ (A @ vals)) * h3
    assert nonlocal_ <= grad2**2 / mu1 * (1 + 1e-10)


def test_eigenvalue_ball(ball_grid_16):
    mu1, ef = first_eigenvalue(ball_grid_16, tol=1e-7)
    assert mu1 == pytest.approx(np.pi**2, rel=0.05)
    assert ef.mass() == pytest.approx(1.0, rel=1e-12)
    # discrete error is O(h) from below
    assert mu1 < np.pi**2


def test_eigenvalue_box():
    # face-aligned Dirichlet ghosts enlarge each axis by exactly h, so the
    # discrete eigenvalue is 3 * (4/h^2) sin^2(pi / (2 (n+1))); check against
    # that exact value and the O(h) march toward 3 pi^2
    gaps = []
    for n in (8, 16, 32):
        grid = build_grid(DomainSpec.box(lo=(0, 0, 0), hi=(1, 1, 1)),
                          cells_per_unit=n)
        mu1, _ = first_eigenvalue(grid, tol=1e-8)
        h = 1.0 / n
        exact_h = 3 * (4 / h**2) * np.sin(np.pi / (2 * (n + 1))) ** 2
        assert mu1 == pytest.approx(exact_h, rel=1e-7)
        gaps.append(3 * np.pi**2 - mu1)
    assert gaps[0] > gaps[1] > gaps[2] > 0
    assert gaps[2] == pytest.approx(2 * (1 / 32) * 3 * np.pi**2, rel=0.15)


def test_eigenvalue_scaling():
    mu_base, _ = first_eigenvalue(
        build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=16), tol=1e-6)
    mu2, _ = first_eigenvalue(
        build_grid(DomainSpec.ball(radius=2.0), cells_per_unit=10), tol=1e-6)
    assert mu2 * 4.0 / mu_base == pytest.approx(1.0, abs=0.02)


def test_eigenvalue_tolerance_consistency():
    grid = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=8)
    mu_loose, _ = first_eigenvalue(grid, tol=1e-5)
    mu_tight, _ = first_eigenvalue(grid, tol=1e-9)
    assert mu_loose == pytest.approx(mu_tight, rel=1e-8)


def test_newton_potential_uniform_ball():
    # sample the indicator's jump with its midpoint value so the trapezoid
    # rule sees the piecewise-linear interpolant of the density
    J = 20000
    rf = RadialField.from_function(2.0, J, lambda r: np.where(
        r < 1.0, 1.0, np.where(r == 1.0, np.sqrt(0.5), 0.0)))
    phi = newton_potential_radial(rf)
    r = rf.r
    exact = np.where(r <= 1.0, (3 - r**2) / 6, 1 / (3 * np.maximum(r, 1e-9)))
    assert phi.values[0] == pytest.approx(0.5, abs=1e-6)
    assert np.abs(phi.values - exact).max() <= 1e-6


def test_newton_potential_zero():
    rf = RadialField.from_function(1.0, 600, lambda r: 0.0 * r)
    assert np.all(newton_potential_radial(rf).values == 0.0)


def test_dirichlet_radial_unit_source():
    J = 10000
    src = RadialField.from_function(1.0, J, lambda r: np.ones_like(r))
    phi = poisson_dirichlet_radial(src)
    exact = (1 - src.r**2) / 6
    assert np.abs(phi.values - exact).max() <= 1e-8


def test_dirichlet_vs_newton_constant_gap():
    J = 8000
    rf = RadialField.from_function(1.0, J, lambda r: (r <= 1.0) * 1.0)
    phiN = newton_potential_radial(rf)
    phiD = poisson_dirichlet_radial(RadialField(rf.values**2, rf.h))
    gap = phiN.values - phiD.values
    assert np.abs(gap - 1.0 / 3.0).max() <= 1e-8


def test_dirichlet_radial_zero():
    src = RadialField.from_function(1.0, 600, lambda r: 0.0 * r)
    assert np.all(poisson_dirichlet_radial(src).values == 0.0)


def test_radial_and_3d_agree_on_radial_data():
    grid = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=16)
    rr = np.linalg.norm(grid.points, axis=1)
    u2 = np.exp(-4 * rr**2)
    phi3 = poisson_dirichlet(ScalarField(grid, u2), grid)
    src = RadialField.from_function(1.0, 4000, lambda r: np.exp(-4 * r**2))
    phi1 = poisson_dirichlet_radial(src)
    interp = np.interp(rr, src.r, phi1.values)
    err = np.abs(phi3.values - interp).max()
    assert err <= 0.5 * grid.spacing * np.abs(phi1.values).max() / 0.125


def test_cg_failure_carries_history():
    grid = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=12)
    A = laplacian(grid)
    b = np.ones(grid.n_inside)
    with pytest.raises(NumericError) as err:
        _cg(A, b, 1e-14, maxiter=3, history_stride=1)
    assert len(err.value.residual_history) >= 1


def test_poisson_requires_matching_grid(ball_grid_16, ball_grid_8):
    f = ScalarField(ball_grid_16, np.ones(ball_grid_16.n_inside))
    with pytest.raises(ValueError):
        poisson_dirichlet(f, ball_grid_8)
