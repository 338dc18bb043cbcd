"""Domains, expanding scalings, offset regions, and masked grids.

The geometry layer is symbolic: a DomainSpec knows its signed distance, so
scaled copies (lambda * D acts on the set, moving centers), erosions and
dilations are exact, and grids are cell-center masks with midpoint quadrature.
"""

import numpy as np

from splab import DomainSpec, build_grid, integrate, region, scale_domain
from splab.fields import ScalarField

# a zoo of supported shapes
shapes = {
    "ball": DomainSpec.ball(radius=1.0),
    "annulus": DomainSpec.annulus(inner=1.0, outer=2.0),
    "box": DomainSpec.box(lo=(-2, -2, -2), hi=(2, 2, 2)),
    "solid torus (cat = 2)": DomainSpec.solid_torus(major=2.0, minor=0.6),
}
for name, spec in shapes.items():
    grid = build_grid(spec, cells_per_unit=10)
    vol = grid.n_inside * grid.cell_volume()
    print(f"{name:22s} dims={grid.dims} cells={grid.n_inside:6d} volume~{vol:.3f}")

# scaling acts on the SET: lambda B_r(x0) = B_{lambda r}(lambda x0)
off_center = DomainSpec.ball(center=(1, 0, 0), radius=1.0)
doubled = scale_domain(off_center, 2.0)
print("\nlambda * B_1((1,0,0)) with lambda = 2:", doubled.to_json())
probe = np.array([[-0.5, 0, 0], [3.9, 0, 0]])
print("contains(-0.5, 0, 0), (3.9, 0, 0):", doubled.contains(probe))

# erosions / dilations give the homotopy-equivalent offset bodies
omega = shapes["box"]
for margin in (-1.0, 1.0):
    pred = region(omega, margin)
    label = "erosion" if margin < 0 else "dilation"
    corner = np.array([[1.1, 1.1, 1.1]])
    print(f"{label} by {abs(margin)}: contains corner(1.1)^3 ->",
          bool(pred.contains(corner)[0]))

# midpoint quadrature: exact for constants on lattice-aligned boxes,
# O(h) boundary error on curved bodies
gridb = build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=32)
ones = ScalarField(gridb, np.ones(gridb.n_inside))
print(f"\nball volume by quadrature: {integrate(ones, gridb):.5f}"
      f"  (4 pi / 3 = {4 * np.pi / 3:.5f})")
odd = ScalarField(gridb, gridb.points[:, 0])
print(f"odd integrand cancels to {integrate(odd, gridb):.2e}")
