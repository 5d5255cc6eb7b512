"""risklab: exact risk oracles and theoretical bounds for comparing ridge
regression, early-stopped gradient descent, and single-pass SGD on
well-specified linear regression.
"""

__version__ = "0.1.0"

from .problems import (
    BoundConstants,
    Dataset,
    MembershipReport,
    ProblemInstance,
    Spectrum,
    SpectrumConditionReport,
    check_spectrum_condition,
    class_membership,
    default_power_law_dim,
    make_custom_problem,
    make_power_law_problem,
    make_spike_problem,
    problem_from_dict,
    problem_from_json,
    problem_to_dict,
    problem_to_json,
    sample_dataset,
)
from .estimators import (
    GDConfig,
    RidgeConfig,
    SGDConfig,
    gd_analytic,
    gd_filter_factors,
    gd_path,
    max_stable_stepsize,
    ridge_fit,
    sgd_run,
    sgd_schedule,
)
from .oracles import (
    RiskEstimate,
    excess_risk,
    fixed_design_gd_risk,
    fixed_design_ridge_risk,
    gd_conditional_risk,
    monte_carlo_risk,
    ridge_conditional_risk,
    sgd_exact_risk_gaussian,
    sgd_paths_excess_risk,
)
from .bounds import (
    BoundReport,
    gd_lower_bound,
    gd_ridge_type_bound,
    gd_sgd_type_bound,
    power_law_exponent,
    ridge_bound,
    sgd_bound,
    shrinkage_matrix,
)
from .experiments import (
    RateFit,
    SweepResult,
    dominance_gd_vs_ridge,
    dominance_gd_vs_sgd,
    hard_instance_separation,
    rate_fit,
    rate_table,
    theory_grid,
    tune_and_measure,
)

__all__ = [
    "__version__",
    # problems
    "BoundConstants", "Dataset", "MembershipReport", "ProblemInstance",
    "Spectrum", "SpectrumConditionReport", "check_spectrum_condition",
    "class_membership", "default_power_law_dim", "make_custom_problem",
    "make_power_law_problem", "make_spike_problem", "problem_from_dict",
    "problem_from_json", "problem_to_dict", "problem_to_json",
    "sample_dataset",
    # estimators
    "GDConfig", "RidgeConfig", "SGDConfig", "gd_analytic",
    "gd_filter_factors", "gd_path", "max_stable_stepsize", "ridge_fit",
    "sgd_run", "sgd_schedule",
    # oracles
    "RiskEstimate", "excess_risk", "fixed_design_gd_risk",
    "fixed_design_ridge_risk", "gd_conditional_risk", "monte_carlo_risk",
    "ridge_conditional_risk", "sgd_exact_risk_gaussian",
    "sgd_paths_excess_risk",
    # bounds
    "BoundReport", "gd_lower_bound", "gd_ridge_type_bound",
    "gd_sgd_type_bound", "power_law_exponent", "ridge_bound", "sgd_bound",
    "shrinkage_matrix",
    # experiments
    "RateFit", "SweepResult", "dominance_gd_vs_ridge", "dominance_gd_vs_sgd",
    "hard_instance_separation", "rate_fit", "rate_table", "theory_grid",
    "tune_and_measure",
]
