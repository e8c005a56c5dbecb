"""Replica orchestration and the statistical batteries."""
from .diagnostics import (
    ChiSquare,
    CltDiagnostics,
    SlopeFit,
    clt_battery,
    conditional_pairs,
    geometric_chisquare,
    independence_test,
    loglog_slope,
    studentize,
)
from .experiments import (
    BadGapKernel,
    BadRateKernel,
    CollisionDistanceKernel,
    Estimate,
    LagProductKernel,
    SubtreeHitKernel,
    XiSumKernel,
    bad_gap_battery,
    bad_rate,
    clt_curve,
    covariance_curve,
    covariance_from_rows,
    fourth_moment_curve,
    fourth_moment_from_samples,
    gap_constants,
    hitting_curve,
    kappa_curve,
    truncation_bias_curve,
    variance_curve,
    xi_sum_samples,
)
from .moments import (
    InsufficientDataError,
    MomentAccumulator,
    SampleSummary,
    jackknife,
    jackknife_se,
    summarize,
)
from .runner import WORKERS_ENV, default_workers, run_replicas
