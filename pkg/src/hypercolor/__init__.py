"""Second-moment tooling for random hypergraph colorings.

The package splits into closed-form pieces (``moments``), the overlap
polytope and its sub-domains (``polytope``), a multistart maximizer over
those domains (``maximizer``), planted-model simulation and core
extraction (``simulator``), exact brute-force oracles (``oracle``), and a
JSON-emitting command line (``cli``).
"""

__version__ = "0.1.0"

from .diagnostics import BudgetError, ProjectionError, RegimeWarning
from .maximizer import (
    CondensationReport,
    MaximizationReport,
    SearchConfig,
    condensation_witness,
    directional_derivative,
    maximize,
    s_stable_gap_table,
)
from .moments import (
    FlatHessian,
    ModelParams,
    RateValue,
    StabilityBoundaryReport,
    ThresholdBounds,
    binary_entropy,
    energy,
    entropy,
    first_moment_exponent,
    first_moment_zero,
    flat_rate,
    hessian_at_flat,
    kappa,
    rate,
    s_stable_rate,
    scaled_identity_rate,
    stability_boundary_report,
    stability_constant,
    stable_rate,
    threshold_bounds,
)
from .oracle import (
    ClusterEnumeration,
    ExactCounts,
    empirical_first_moment,
    enumerate_cluster,
    enumerate_colorings,
    exact_expected_colorings,
    log_partition_function,
    partition_function,
    tame_counts,
)
from .polytope import (
    DomainKind,
    DomainTag,
    OverlapMatrix,
    averaging_condition,
    domain_member,
    flat_overlap,
    flatten,
    is_in_D,
    is_in_S,
    is_separable_matrix,
    is_tame_matrix,
    overlap_of,
    project_to_D,
    random_point_in_D,
    random_point_in_tame,
    s_stable_overlap,
    scaled_identity,
    separability_window,
    stability_index,
    stable_overlap,
)
from .serialize import (
    canonical_json,
    coloring_from_text,
    coloring_to_text,
    hypergraph_from_text,
    hypergraph_to_text,
    matrix_from_csv,
    matrix_from_json_dict,
    matrix_to_csv,
    matrix_to_json_dict,
    strip_volatile,
)
from .simulator import (
    Coloring,
    CoreDecomposition,
    CoreThresholds,
    Hypergraph,
    SeparabilityReport,
    balanced_coloring,
    cluster_size_log_bound,
    edge_count_m,
    extract_core,
    in_cluster,
    is_balanced,
    is_proper,
    monochromatic_count,
    planted_edge_probability,
    random_coloring,
    sample_hypergraph,
    sample_planted,
    separability_scan,
)

__all__ = [name for name in dir() if not name.startswith("_")]
