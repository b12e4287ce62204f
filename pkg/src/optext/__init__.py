"""Optimal-extension toolkit: weights, ODE certificates, model domains.

The package checks admissibility of weight functions, solves the induced
ODE system, evaluates sharp constants on model domains, and exposes a CLI
that writes deterministic reports.
"""

__version__ = "0.1.0"

from .errors import (
    OptextError,
    NonIntegrableWeightError,
    QuadratureError,
    LimitUndefinedError,
    BoundaryValueError,
    AdmissibilityError,
    PositivityViolationError,
    ConstructionError,
    InternalConsistencyError,
    DomainError,
    SingularityError,
    UnsupportedDomainError,
    ChartRangeError,
    ConfigError,
)
from .weights import (
    WeightSpec,
    AdmissibilityReport,
    smooth_bump,
    smooth_bump_deriv,
    make_weight,
    const_weight,
    ohsawa2_weight,
    concise_weight,
    demailly_weight,
    dhp_weight,
    limiting_weight,
    mv_weight,
    table_weight,
    load_table_weight,
    bump_weight,
    catalog_defaults,
    parse_weight,
    weight_moment,
    boundary_value,
    check_cA,
    check_cA_delta,
    pointwise_margins,
    check_sufficient,
    approximate_weight,
    master_total,
)
from .odesys import (
    OdeSolution,
    ResidualReport,
    Mollifier,
    solve_ode,
    residual_check,
    positivity_check,
    demailly_quoted_s,
    demailly_s_lower_bound,
    splice_weight,
    make_mollifier,
)
from .extremal import (
    ModelBall,
    CrossingPair,
    degenerate_disc,
    multi_indices,
    monomial_norms,
    radial_integral,
    least_norm_extension,
    optimality_ratio,
    ratio_sweep,
    build_crossing,
    moment_dominance,
    disc_tail_constant,
)
from .planar import (
    PlanarDomain,
    SuitaRecord,
    unit_disc,
    annulus,
    green,
    log_capacity,
    bergman,
    suita_check,
    suita_sweep,
    analytic_capacity_disc,
    l_kernel,
    l_zero_count,
)
from .residue import (
    PolarConfig,
    ResidueEstimate,
    sphere_volume,
    slab_integral,
    residue_limit,
)

__all__ = [
    "__version__",
    "OptextError",
    "NonIntegrableWeightError",
    "QuadratureError",
    "LimitUndefinedError",
    "BoundaryValueError",
    "AdmissibilityError",
    "PositivityViolationError",
    "ConstructionError",
    "InternalConsistencyError",
    "DomainError",
    "SingularityError",
    "UnsupportedDomainError",
    "ChartRangeError",
    "ConfigError",
    "WeightSpec",
    "AdmissibilityReport",
    "smooth_bump",
    "smooth_bump_deriv",
    "make_weight",
    "const_weight",
    "ohsawa2_weight",
    "concise_weight",
    "demailly_weight",
    "dhp_weight",
    "limiting_weight",
    "mv_weight",
    "table_weight",
    "load_table_weight",
    "bump_weight",
    "catalog_defaults",
    "parse_weight",
    "weight_moment",
    "boundary_value",
    "check_cA",
    "check_cA_delta",
    "pointwise_margins",
    "check_sufficient",
    "approximate_weight",
    "master_total",
    "OdeSolution",
    "ResidualReport",
    "Mollifier",
    "solve_ode",
    "residual_check",
    "positivity_check",
    "demailly_quoted_s",
    "demailly_s_lower_bound",
    "splice_weight",
    "make_mollifier",
    "ModelBall",
    "CrossingPair",
    "degenerate_disc",
    "multi_indices",
    "monomial_norms",
    "radial_integral",
    "least_norm_extension",
    "optimality_ratio",
    "ratio_sweep",
    "build_crossing",
    "moment_dominance",
    "disc_tail_constant",
    "PlanarDomain",
    "SuitaRecord",
    "unit_disc",
    "annulus",
    "green",
    "log_capacity",
    "bergman",
    "suita_check",
    "suita_sweep",
    "analytic_capacity_disc",
    "l_kernel",
    "l_zero_count",
    "PolarConfig",
    "ResidueEstimate",
    "sphere_volume",
    "slab_integral",
    "residue_limit",
]
