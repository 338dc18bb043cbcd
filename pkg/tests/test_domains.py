import json

import numpy as np
import pytest

from splab.domains import (DomainSpec, build_grid, cell_cap, integrate, region,
                           scale_domain)
from splab.errors import GeometryError, ResourceLimitError
from splab.fields import ScalarField


def test_ball_mask_volume():
    grid = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=16)
    assert grid.spacing == pytest.approx(0.0625)
    vol = grid.n_inside * grid.cell_volume()
    assert abs(vol - 4 * np.pi / 3) <= 0.02 * (4 * np.pi / 3)


def test_box_interior_cells_exact():
    grid = build_grid(DomainSpec.box(lo=(0, 0, 0), hi=(1, 1, 1)), cells_per_unit=4)
    assert grid.n_inside == 4**3


def test_annulus_excludes_hole():
    spec = DomainSpec.annulus(inner=1.0, outer=2.0)
    grid = build_grid(spec, cells_per_unit=9)
    rr = np.linalg.norm(grid.points, axis=1)
    assert rr.min() >= 1.0 - grid.spacing * np.sqrt(3)
    assert rr.min() >= 1.0  # cell-center test is strict


def test_scale_ball_moves_center():
    spec = DomainSpec.ball(center=(1, 0, 0), radius=1.0)
    scaled = scale_domain(spec, 2.0)
    # (-0.5, 0, 0) separates B_2((2,0,0)) from the wrong reading B_2((1,0,0))
    pts = np.array([[2.0, 0, 0], [3.9, 0, 0], [-0.5, 0, 0]])
    assert list(scaled.contains(pts)) == [True, True, False]
    # lambda B_r(x0) = B_{lambda r}(lambda x0)
    direct = DomainSpec.ball(center=(2, 0, 0), radius=2.0)
    rng = np.random.default_rng(0)
    sample = rng.uniform(-5, 5, size=(1000, 3))
    assert np.array_equal(scaled.contains(sample), direct.contains(sample))


def test_scale_identity_and_annulus():
    spec = DomainSpec.annulus(center=(1, 0, 0), inner=1.0, outer=2.0)
    same = scale_domain(spec, 1.0)
    rng = np.random.default_rng(1)
    pts = rng.uniform(-8, 8, size=(1000, 3))
    assert np.array_equal(spec.contains(pts), same.contains(pts))
    tripled = scale_domain(spec, 3.0)
    direct = DomainSpec.annulus(center=(3, 0, 0), inner=3.0, outer=6.0)
    assert np.array_equal(tripled.contains(pts), direct.contains(pts))


def test_scale_composition():
    for spec in (DomainSpec.ball(center=(0.5, -1, 0), radius=1.2),
                 DomainSpec.box(lo=(-1, 0, 0), hi=(1, 2, 1)),
                 DomainSpec.solid_torus(major=2.0, minor=0.5)):
        a = scale_domain(scale_domain(spec, 1.5), 2.0)
        b = scale_domain(spec, 3.0)
        rng = np.random.default_rng(2)
        pts = rng.uniform(-10, 10, size=(1000, 3))
        assert np.array_equal(a.contains(pts), b.contains(pts))


def test_scale_below_one_rejected():
    with pytest.raises(GeometryError):
        scale_domain(DomainSpec.ball(), 0.5)


def test_region_concentric_balls():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-4, 4, size=(2000, 3))
    eroded = region(DomainSpec.ball(radius=2.0), -1.0)
    dilated = region(DomainSpec.ball(radius=2.0), +1.0)
    rr = np.linalg.norm(pts, axis=1)
    assert np.array_equal(eroded.contains(pts), rr <= 1.0)
    assert np.array_equal(dilated.contains(pts), rr <= 3.0)


def test_region_box_faces():
    box = DomainSpec.box(lo=(0, 0, 0), hi=(2, 2, 2))
    r = 0.5
    pred = region(box, -r)
    rng = np.random.default_rng(4)
    pts = rng.uniform(-0.5, 2.5, size=(3000, 3))
    inside = pred.contains(pts)
    face_dist = np.minimum(pts, 2 - pts).min(axis=1)
    assert np.array_equal(inside, face_dist >= r)


def test_region_empty_erosion_rejected():
    with pytest.raises(GeometryError):
        region(DomainSpec.ball(radius=1.0), -1.5)


def test_integrate_constant_box():
    grid = build_grid(DomainSpec.box(lo=(0, 0, 0), hi=(1, 1, 1)), cells_per_unit=8)
    f = ScalarField(grid, np.ones(grid.n_inside))
    assert integrate(f, grid) == pytest.approx(1.0, abs=1e-14)


def test_integrate_ball_volume():
    grid = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=32)
    f = ScalarField(grid, np.ones(grid.n_inside))
    assert integrate(f, grid) == pytest.approx(4 * np.pi / 3, rel=0.01)


def test_integrate_odd_function_cancels():
    grid = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=12)
    f = ScalarField(grid, grid.points[:, 0] * np.exp(grid.points[:, 1]))
    assert abs(integrate(f, grid)) < 1e-12


def test_integrate_linear_monotone():
    grid = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=8)
    rng = np.random.default_rng(5)
    a = rng.random(grid.n_inside)
    b = rng.random(grid.n_inside)
    ia = integrate(ScalarField(grid, a), grid)
    ib = integrate(ScalarField(grid, b), grid)
    iab = integrate(ScalarField(grid, 2 * a + 3 * b), grid)
    assert iab == pytest.approx(2 * ia + 3 * ib, rel=1e-12)
    assert ia >= 0


def test_integrate_shape_mismatch():
    g1 = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=8)
    g2 = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=10)
    f = ScalarField(g1, np.ones(g1.n_inside))
    with pytest.raises(ValueError):
        integrate(f, g2)


def test_nested_masks():
    inner = DomainSpec.ball(radius=1.0)
    outer = DomainSpec.ball(radius=1.5)
    grid = build_grid(outer, cells_per_unit=10)
    m_in = inner.contains(grid.points)
    m_out = outer.contains(grid.points)
    assert np.all(~m_in | m_out)
    assert m_in.sum() < m_out.sum()


def test_cell_cap_names_axis(monkeypatch):
    with pytest.raises(ResourceLimitError, match="axis x"):
        build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=400)
    monkeypatch.setenv("SPLAB_CELL_CAP", "1000")
    assert cell_cap() == 1000
    grid = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=150)
    assert grid.dims[0] > 192


def test_empty_mask_rejected():
    # a thin shell that no cell center at this spacing can hit
    with pytest.raises(GeometryError):
        build_grid(DomainSpec.annulus(inner=0.9, outer=1.0), cells_per_unit=1)


def test_boundary_layer_flag():
    grid = build_grid(DomainSpec.box(lo=(0, 0, 0), hi=(1, 1, 1)), cells_per_unit=6)
    # 6^3 interior; the outer shell of the masked cells is flagged
    assert grid.boundary.sum() == 6**3 - 4**3


def test_json_round_trip():
    specs = [
        DomainSpec.ball(center=(1, 2, 3), radius=0.7),
        DomainSpec.annulus(inner=0.5, outer=1.5),
        DomainSpec.box(lo=(-1, 0, 0), hi=(0, 1, 2)),
        DomainSpec.solid_torus(major=3.0, minor=1.0),
        scale_domain(DomainSpec.truncated_space(radius=16.0), 2.0),
    ]
    for spec in specs:
        blob = json.dumps(spec.to_json())
        back = DomainSpec.from_json(json.loads(blob))
        assert back.kind == spec.kind
        assert back.scale == spec.scale
        rng = np.random.default_rng(6)
        pts = rng.uniform(-8, 8, size=(500, 3))
        assert np.array_equal(spec.contains(pts), back.contains(pts))


def test_invalid_specs_rejected():
    with pytest.raises(GeometryError):
        DomainSpec.ball(radius=-1.0)
    with pytest.raises(GeometryError):
        DomainSpec.annulus(inner=2.0, outer=1.0)
    with pytest.raises(GeometryError):
        DomainSpec.box(lo=(1, 0, 0), hi=(0, 1, 1))
    with pytest.raises(GeometryError):
        DomainSpec.solid_torus(major=1.0, minor=2.0)
