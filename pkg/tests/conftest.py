import numpy as np
import pytest

from splab.domains import DomainSpec, build_grid
from splab.minimize import SolverOptions, radial_minimize


@pytest.fixture(scope="session")
def ball_grid_16():
    return build_grid(DomainSpec.ball(radius=1.0), cells_per_unit=16)


@pytest.fixture(scope="session")
def ball_grid_8():
    return build_grid(DomainSpec.ball(radius=2.0), cells_per_unit=8)


@pytest.fixture(scope="session")
def c_inf_rho05():
    """Truncated whole-space ground state at rho = 0.5, p = 2.5 (shared)."""
    opts = SolverOptions(max_iters=30_000, grad_tol=3e-6)
    res32 = radial_minimize(32.0, 2.5, 0.5, 2048, opts=opts, potential="newton")
    res64 = radial_minimize(64.0, 2.5, 0.5, 4096, opts=opts, potential="newton")
    return {"res32": res32, "res64": res64}


def rows_summary(rows):
    bad = [r for r in rows if not r.ok]
    lines = [f"{r.property}: lhs={r.lhs} rhs={r.rhs} tol={r.tolerance}" for r in bad]
    return "\n".join(lines)
