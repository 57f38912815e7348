"""Minimax lower bounds from f-divergences, with exact finite-space oracles."""

from .distributions import (
    DiscreteDistribution,
    Ensemble,
    product_distribution,
    uniform_mixture,
    validate,
)
from .divergences import (
    DivergenceGenerator,
    builtin_generator,
    default_generators,
    eval_divergence,
    squared_hellinger,
    total_variation,
    uniform_divergence_floor,
)
from .entropy_bounds import (
    EntropyProfile,
    LossSpec,
    analytic_divergence,
    builtin_profile,
    entropy_risk_bound,
    optimize_entropy_bound,
    power_loss,
    profile_from_table,
    support_function_schedule,
)
from .informativity import (
    CoveringFamily,
    InformativityResult,
    covering_specialization,
    covering_upper_bound,
    informativity_closed_form,
    informativity_numeric,
    informativity_tv_exact,
    simple_upper_chain,
)
from .mixture_bounds import (
    implicit_risk_bound,
    named_bound,
    named_bound_from_ensemble,
    tangent_risk_bound,
    two_point_witness,
    weighted_divergence_floor,
)
from .constructions import (
    BinaryCode,
    CapGeometry,
    CovarianceFamily,
    build_cov_family,
    cap_distance,
    cap_geometry,
    covariance_minimax_bound,
    gaussian_kl,
    kl_frobenius_check,
    spectral_separation,
    sphere_packing_points,
    support_packing_bound,
    varshamov_gilbert_code,
)
from .report import BoundReport
from .testing_risk import bayes_risk_exact, map_test, minimax_risk

__version__ = "0.1.0"

__all__ = [
    "BinaryCode",
    "BoundReport",
    "CapGeometry",
    "CovarianceFamily",
    "CoveringFamily",
    "DiscreteDistribution",
    "DivergenceGenerator",
    "Ensemble",
    "EntropyProfile",
    "InformativityResult",
    "LossSpec",
    "analytic_divergence",
    "bayes_risk_exact",
    "build_cov_family",
    "builtin_generator",
    "builtin_profile",
    "cap_distance",
    "cap_geometry",
    "covariance_minimax_bound",
    "covering_specialization",
    "covering_upper_bound",
    "default_generators",
    "entropy_risk_bound",
    "eval_divergence",
    "gaussian_kl",
    "implicit_risk_bound",
    "informativity_closed_form",
    "informativity_numeric",
    "informativity_tv_exact",
    "kl_frobenius_check",
    "map_test",
    "minimax_risk",
    "named_bound",
    "named_bound_from_ensemble",
    "optimize_entropy_bound",
    "power_loss",
    "product_distribution",
    "profile_from_table",
    "simple_upper_chain",
    "spectral_separation",
    "sphere_packing_points",
    "squared_hellinger",
    "support_function_schedule",
    "support_packing_bound",
    "tangent_risk_bound",
    "total_variation",
    "two_point_witness",
    "uniform_divergence_floor",
    "uniform_mixture",
    "validate",
    "varshamov_gilbert_code",
    "weighted_divergence_floor",
]
