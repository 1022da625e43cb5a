"""Extremal index estimation via block-maxima cycles."""

from exidx._core import (  # noqa: F401
    ConfigError,
    CycleSeries,
    DataError,
    DegeneracyError,
    DkCheckResult,
    DkWitness,
    ExceedanceSummary,
    KnValue,
    MMSignature,
    ThetaEstimate,
    anti_d1_proportion,
    anti_dk_proportion,
    application_report,
    block_cycles,
    cycle_direct,
    cycle_indirect,
    cycle_tdc,
    dk_count,
    empirical_quantile,
    exceedance_summary,
    ingest_prices,
    ingest_prices_text,
    intervals_estimator,
    k_selection_report,
    kn_value,
    max_moment_scaled_theta,
    max_moment_theta,
    ml_estimator,
    mm_check_dk,
    mm_extremal_index,
    mm_min_k,
    mm_simulate,
    reference_theta,
    resolve_level,
    run_study,
    runs_estimator,
    simulate,
    tdc_estimator,
    to_unit_frechet,
    trajectory,
    upcrossing_count,
    upcrossings_estimator,
)

__version__ = "0.1.0"
