"""Non-negative bound states of 1D coupled nonlinear Schrodinger systems.

Library layout:

- model: problem statements, coefficient profiles, grids, fields
- variational: discrete energy, Nehari machinery, blow-up rescaling
- solver: constrained minimizer on a fixed interval
- continuation: sweeps in the truncation radius with warm starts
- liouville: shooting certifier for the limit equation, soliton oracle
- cli / plots: command line, artifact files and report figures
"""

__version__ = "0.1.0"

from .continuation import (
    ContinuationTrace,
    check_bounded_peak,
    check_monotone_level,
    extract_limit,
    grid_for_radius,
    sweep,
)
from .liouville import (
    ShootResult,
    SolitonParams,
    classify_scan,
    residual_of_limit_candidate,
    shoot,
    soliton_field,
    soliton_profile,
)
from .model import (
    ConstantQ,
    Field,
    GaussianQ,
    Grid,
    ProblemSpec,
    QProfile,
    RationalQ,
    TabulatedQ,
    eval_q,
    field_from_samples,
    gaussian_init,
    make_grid,
    validate_problem,
)
from .solver import (
    SolveOptions,
    SolveResult,
    check_symmetry,
    drop_trivial_components,
    max_stats,
    minimize_on_nehari,
    newton_refine,
)
from .variational import (
    EnergyBreakdown,
    blowup_rescale,
    el_residual,
    el_residual_norm,
    energy_breakdown,
    energy_gradient,
    integrate,
    nehari_residual,
    nehari_scale,
    project_to_nehari,
    restricted_energy,
)

__all__ = [
    "__version__",
    "ConstantQ", "Field", "GaussianQ", "Grid", "ProblemSpec", "QProfile",
    "RationalQ", "TabulatedQ", "eval_q", "field_from_samples", "gaussian_init",
    "make_grid", "validate_problem",
    "EnergyBreakdown", "blowup_rescale", "el_residual", "el_residual_norm",
    "energy_breakdown", "energy_gradient", "integrate", "nehari_residual",
    "nehari_scale", "project_to_nehari", "restricted_energy",
    "SolveOptions", "SolveResult", "check_symmetry", "drop_trivial_components",
    "max_stats", "minimize_on_nehari", "newton_refine",
    "ContinuationTrace", "check_bounded_peak", "check_monotone_level",
    "extract_limit", "grid_for_radius", "sweep",
    "ShootResult", "SolitonParams", "classify_scan",
    "residual_of_limit_candidate", "shoot", "soliton_field", "soliton_profile",
]
