"""splab: a numerical laboratory for mass-constrained Schrodinger-Poisson
ground states on bounded, expanding, annular, and truncated whole-space
domains, with audits of the variational identities that govern them."""

from .domains import (
    DomainSpec,
    Grid,
    RegionPredicate,
    build_grid,
    integrate,
    region,
    scale_domain,
)
from .elliptic import (
    first_eigenvalue,
    newton_potential_radial,
    poisson_dirichlet,
    poisson_dirichlet_radial,
)
from .energy import (
    EnergyBreakdown,
    MultiplierEstimate,
    energy_domain,
    energy_freespace,
    gradient,
    multiplier,
)
from .errors import (
    GeometryError,
    NumericError,
    ResourceLimitError,
    SplabError,
    StagnationError,
)
from .fields import RadialField, ScalarField
from .greens import (
    RegularBoundReport,
    pair_energy_regular,
    regular_part_ball,
    regular_part_numeric,
    sup_regular_part,
)
from .minimize import (
    SolveResult,
    SolverOptions,
    minimize_constrained,
    minimize_with_barycenter,
    project_mass,
    radial_minimize,
)
from .scalings import ScalingExponents, exponents, rescale, scaling_audit
from .topology import (
    BarycenterReport,
    SublevelThreshold,
    barycenter,
    containment_audit,
    sublevel_threshold,
    transplant,
    transplant_lattice,
)
from .appendix import (
    EmbeddingReport,
    divergence_audit,
    embedding_constant,
    positivity_audit,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
