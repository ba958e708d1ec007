"""Upper-tail large deviations of r-star counts in G(n, p).

Submodules: :mod:`rate_core` (closed-form rates, regimes, bounds),
:mod:`variational` (the one-dimensional trade-off and its critical
constants), :mod:`exact` (small-instance exact laws), :mod:`simulate`
(Monte-Carlo estimators) and :mod:`cli`.
"""

from .exact import (
    DegreeSequence,
    DiscreteDistribution,
    GuardError,
    JointDistribution,
    convex_sum_min,
    count_graphs_with_degrees,
    exact_binomial_pmf,
    exact_degree_measures,
    exact_gnp_star_tail,
    exact_iid_tail,
    exact_joint_YpYpp,
    exact_Y_distribution,
    mckay_wormald_estimate,
)
from .rate_core import (
    RegimeKind,
    RegimeTag,
    StarParams,
    classify_regime,
    phi,
    phi_order,
    psi,
    rate_report,
    star_rate_asymptotic,
    unified_rate,
)
from .simulate import (
    Estimator,
    PlantedConfig,
    TailEstimate,
    TiltedBinomial,
    na_empirical_check,
    naive_tail,
    planted_tail_lower,
    rate_comparison,
    split_sum,
    star_count,
    tilted_tail,
)
from .variational import (
    CriticalConstants,
    VariationalSolution,
    alpha0,
    alpha1,
    c_crit,
    critical_constants,
    delta_star,
    rate_function,
    solve,
)

__version__ = "0.1.0"
