//! Reproducible Monte Carlo: trials, empirical thresholds, rate estimates,
//! the figure sweeps and null-law diagnostics.

mod diagnostics;
mod engine;
mod estimate;
mod sweep;

pub use diagnostics::{
    ks_p_value, ks_statistic, null_samples, run_null_diagnostics, upper_tri_covariance, upper_tri_index,
    upper_tri_pair, NullDiagnostics, NullSamples, UpperTriCovariance, CORRELATION_TOLERANCE, DIAGONAL_TOLERANCE,
    KS_TOLERANCE,
};
pub use engine::{parallel_map, run_trials, tags, StatSet, Statistic, StreamPlan, TrialBatchResult};
pub use estimate::{
    empirical_quantile, empirical_quantile_se, empirical_threshold, estimate_rate, relative_error, sort_ascending,
    Detector, RateEstimate,
};
pub use sweep::{
    antennas_for, crossing, format_number, sweep_pd_vs_n, sweep_pd_vs_snr, sweep_threshold_error, PdVsNSweep,
    PdVsSnrSweep, Series, SweepResult, ThresholdErrorSweep, ThresholdMode,
};
