use crate::error::{EmrError, Result};
use crate::numerics::Probability;
use crate::signal::{Hypothesis, ScenarioConfig};

use super::engine::{run_trials, StatSet, Statistic, StreamPlan};

/// 1-based index of the `(1 - eps)` order statistic, `ceil((1 - eps) N)`.
fn order_index(trials: usize, eps: f64) -> usize {
    // The tiny offset absorbs representation error in (1 - eps) * N.
    let k = ((1.0 - eps) * trials as f64 - 1e-9).ceil() as usize;
    k.clamp(1, trials)
}

fn check_resolvable(trials: usize, eps: f64) -> Result<()> {
    Probability::open(eps)?;
    if (trials as f64) * eps < 1.0 {
        return Err(EmrError::InvalidConfig(format!(
            "{trials} trials cannot resolve the {eps} tail (need trials * eps >= 1)"
        )));
    }
    Ok(())
}

/// Upper `(1 - eps)` empirical quantile of an ascending-sorted sample.
pub fn empirical_quantile(sorted: &[f64], eps: f64) -> Result<f64> {
    check_resolvable(sorted.len(), eps)?;
    Ok(sorted[order_index(sorted.len(), eps) - 1])
}

/// Approximate standard error of [`empirical_quantile`]: half the spread of
/// the order statistics one binomial standard deviation either side.
pub fn empirical_quantile_se(sorted: &[f64], eps: f64) -> Result<f64> {
    check_resolvable(sorted.len(), eps)?;
    let n = sorted.len();
    let k = order_index(n, eps);
    let delta = ((n as f64) * eps * (1.0 - eps)).sqrt().ceil() as usize;
    let lo = k.saturating_sub(delta).max(1);
    let hi = (k + delta).min(n);
    Ok(0.5 * (sorted[hi - 1] - sorted[lo - 1]))
}

pub fn sort_ascending(values: &mut [f64]) {
    values.sort_by(f64::total_cmp);
}

/// Empirical CFAR threshold from `trials` noise-only draws.
pub fn empirical_threshold(
    config: &ScenarioConfig,
    statistic: Statistic,
    epsilon: f64,
    trials: usize,
    plan: StreamPlan,
    workers: usize,
) -> Result<f64> {
    if config.hypothesis != Hypothesis::H0 {
        return Err(EmrError::InvalidConfig("empirical thresholds are calibrated under H0".into()));
    }
    check_resolvable(trials, epsilon)?;
    let batch = run_trials(config, StatSet::only(statistic), trials, plan, workers)?;
    let mut v = batch.values(statistic).to_vec();
    sort_ascending(&mut v);
    empirical_quantile(&v, epsilon)
}

/// `|eta_the - eta_emp| / eta_emp`.
pub fn relative_error(eta_the: f64, eta_emp: f64) -> f64 {
    (eta_the - eta_emp).abs() / eta_emp
}

/// Fraction of trials that decided `H1`, with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl RateEstimate {
    pub fn from_values(values: &[f64], threshold: f64) -> Self {
        let trials = values.len();
        let hits = values.iter().filter(|&&v| v > threshold).count();
        let rate = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let std_error = if trials == 0 { 0.0 } else { (rate * (1.0 - rate) / trials as f64).sqrt() };
        Self { rate, std_error, trials }
    }
}

/// A statistic paired with the threshold it is compared against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detector {
    pub statistic: Statistic,
    pub threshold: f64,
}

/// Monte Carlo estimate of `P(statistic > threshold)`: a false-alarm rate
/// for `H0` configs, a detection rate for `H1` configs.
pub fn estimate_rate(
    config: &ScenarioConfig,
    detector: Detector,
    trials: usize,
    plan: StreamPlan,
    workers: usize,
) -> Result<RateEstimate> {
    if trials == 0 {
        return Err(EmrError::InvalidConfig("need at least one trial".into()));
    }
    let batch = run_trials(config, StatSet::only(detector.statistic), trials, plan, workers)?;
    Ok(RateEstimate::from_values(batch.values(detector.statistic), detector.threshold))
}
