"""Data-driven reachable set estimation with probabilistic accuracy guarantees.

Two estimators over a shared sampling/geometry core:

- an adaptive Gaussian-process classifier for arbitrary-shape reachable and
  event sets, scored against an analytic braking-scenario oracle;
- a Monte Carlo interval overapproximator with an explicit sample-complexity
  bound and empirical coverage validation.
"""

from .acc_oracle import (
    analytic_position,
    analytic_velocity,
    boundary_gap,
    is_safe,
    safety_margin,
    stopping_distance,
)
from .core import Box, RngStream, interval_hull, lhs_sample, uniform_sample
from .dynamics import (
    AccSystem,
    DynamicalSystem,
    IntegrationError,
    Trajectory,
    acc_collides,
    acc_rhs,
    acc_system,
    augment_parameters,
    integrate,
    integrate_batch,
    simulate_acc_braking,
)
from .gpc import (
    FitError,
    GpcModel,
    GpcReachEstimate,
    LabeledSample,
    SqExpKernel,
    adaptive_select,
    classify,
    fit,
    fit_hyperparameters,
    kernel_eval,
    log_marginal_likelihood,
    p_misclass,
    posterior,
    run_adaptive_gpc,
    run_sampled_gpc,
)
from .mcs import (
    McsResult,
    ReachSpec,
    TrialRecord,
    coverage_trial_suite,
    mcs_reach,
    sample_bound,
    validate_coverage,
)

__version__ = "0.1.0"
