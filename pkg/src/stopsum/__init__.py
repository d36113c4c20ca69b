"""Heavy-tailed lattice laws, randomly stopped sums, and their asymptotics."""

from stopsum.asym import (
    FLAGS,
    PREDICTORS,
    RegimeInput,
    RegimeReport,
    StableLaw,
    auto_flags,
    predict,
    predict_subcritical,
    sample_stable,
    select_regime,
    stable_cf,
    stable_density,
    stable_density_grid,
    stable_frac_moment,
    stable_frac_moment_exact,
)
from stopsum.clustering import (
    ClusterParams,
    MixedPoissonSpec,
    c_star,
    c_star_curve,
    c_star_formula,
    d_star_pmf,
    delta_exponent,
    lambda_tail_check,
    loglog_slope,
    mixed_poisson_pmf,
    p1_p2,
)
from stopsum.diagnostics import (
    BoundReport,
    decomposition_bound,
    l_delta,
    large_dev_bound,
    llt_error,
    renewal_sum,
    two_term_approx,
    window_sum,
)
from stopsum.errors import (
    BudgetError,
    DegenerateLawError,
    DivergentMomentError,
    QuadratureError,
    SpanError,
    StopsumError,
    SupportOverflowError,
    ValidationError,
)
from stopsum.lattice import (
    LatticePmf,
    Moment,
    PowerLawSpec,
    TruncationPolicy,
    alpha3_norming,
    build_power_law,
    convolve,
    moment,
    norming_b,
    self_convolve,
    tail_prob,
    truncate_window,
)
from stopsum.rig import (
    ClusteringEstimate,
    GraphSample,
    RigConfig,
    average_degree_histogram,
    degree_histogram,
    degree_tail_slopes,
    edge_lines,
    empirical_ck,
    sample_bipartite,
    sample_graph,
)
from stopsum.stopsum import (
    StopPolicy,
    StoppedSumResult,
    ratio_curve,
    stopped_max_pmf,
    stopped_sum_pmf,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "BudgetError",
    "ClusterParams",
    "ClusteringEstimate",
    "DegenerateLawError",
    "DivergentMomentError",
    "FLAGS",
    "GraphSample",
    "LatticePmf",
    "MixedPoissonSpec",
    "Moment",
    "PREDICTORS",
    "PowerLawSpec",
    "QuadratureError",
    "RegimeInput",
    "RegimeReport",
    "RigConfig",
    "SpanError",
    "StableLaw",
    "StopPolicy",
    "StoppedSumResult",
    "StopsumError",
    "SupportOverflowError",
    "TruncationPolicy",
    "ValidationError",
    "alpha3_norming",
    "auto_flags",
    "average_degree_histogram",
    "build_power_law",
    "c_star",
    "c_star_curve",
    "c_star_formula",
    "convolve",
    "d_star_pmf",
    "decomposition_bound",
    "degree_histogram",
    "degree_tail_slopes",
    "delta_exponent",
    "edge_lines",
    "empirical_ck",
    "l_delta",
    "lambda_tail_check",
    "large_dev_bound",
    "llt_error",
    "loglog_slope",
    "mixed_poisson_pmf",
    "moment",
    "norming_b",
    "p1_p2",
    "predict",
    "predict_subcritical",
    "ratio_curve",
    "renewal_sum",
    "sample_bipartite",
    "sample_graph",
    "sample_stable",
    "select_regime",
    "self_convolve",
    "stable_cf",
    "stable_density",
    "stable_density_grid",
    "stable_frac_moment",
    "stable_frac_moment_exact",
    "stopped_max_pmf",
    "stopped_sum_pmf",
    "tail_prob",
    "truncate_window",
    "two_term_approx",
    "window_sum",
    "__version__",
]
