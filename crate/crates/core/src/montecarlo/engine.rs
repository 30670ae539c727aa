//! Trial execution.
//!
//! Trial `t` of sweep point `p` always draws from stream
//! `stream_id(tag, p, t)`, and results are gathered back in trial order, so
//! the worker count never changes any output.

use crate::detector::{emr_full, emr_one_bit_from_signs};
use crate::error::{EmrError, Result};
use crate::numerics::{stream_id, RngStream};
use crate::quantizer::{full_res_scm, one_bit_quantize, SignFrame};
use crate::signal::{generate_frame, Hypothesis, ScenarioConfig};

/// Stream namespaces. Each purpose gets its own tag so calibration and
/// detection trials never reuse a keystream.
pub mod tags {
    pub const THRESHOLD_ONE_BIT: u8 = 1;
    pub const THRESHOLD_FULL: u8 = 2;
    pub const CALIBRATION: u8 = 3;
    pub const DETECTION: u8 = 4;
    pub const DIAGNOSTIC: u8 = 5;
    pub const AD_HOC: u8 = 6;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistic {
    FullRes,
    OneBit,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::FullRes => "fullres",
            Statistic::OneBit => "onebit",
        }
    }
}

/// Which statistics a batch evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StatSet {
    pub one_bit: bool,
    pub full: bool,
}

impl StatSet {
    pub const BOTH: StatSet = StatSet { one_bit: true, full: true };
    pub const ONE_BIT: StatSet = StatSet { one_bit: true, full: false };
    pub const FULL: StatSet = StatSet { one_bit: false, full: true };

    pub fn only(stat: Statistic) -> Self {
        match stat {
            Statistic::FullRes => Self::FULL,
            Statistic::OneBit => Self::ONE_BIT,
        }
    }
}

/// Where a batch draws its streams from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamPlan {
    pub master_seed: u64,
    pub tag: u8,
    pub point: u32,
}

impl StreamPlan {
    pub fn new(master_seed: u64, tag: u8, point: u32) -> Self {
        Self { master_seed, tag, point }
    }

    pub fn stream(&self, trial: u64) -> RngStream {
        RngStream::new(self.master_seed, stream_id(self.tag, self.point, trial))
    }
}

/// Per-trial statistic values for one scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialBatchResult {
    pub one_bit: Vec<f64>,
    pub full: Vec<f64>,
}

impl TrialBatchResult {
    pub fn values(&self, stat: Statistic) -> &[f64] {
        match stat {
            Statistic::FullRes => &self.full,
            Statistic::OneBit => &self.one_bit,
        }
    }

    /// Per-trial `H1` decisions against `threshold`.
    pub fn decisions(&self, stat: Statistic, threshold: f64) -> Vec<Hypothesis> {
        self.values(stat).iter().map(|&v| crate::detector::decide(v, threshold).decision).collect()
    }
}

/// Maps `f` over `0..len` on up to `workers` threads, preserving order.
pub fn parallel_map<T, F>(len: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let workers = workers.max(1).min(len.max(1));
    if workers == 1 {
        return (0..len).map(&f).collect();
    }
    let chunk = len.div_ceil(workers);
    let f = &f;
    let parts: Vec<Result<Vec<T>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = (w * chunk).min(len);
                let hi = ((w + 1) * chunk).min(len);
                scope.spawn(move || (lo..hi).map(f).collect::<Result<Vec<T>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("trial worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(len);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Evaluates the requested statistics on `trials` independent draws of
/// `config`.
///
/// A noise-only scenario that only needs the one-bit statistic samples the
/// sign frame directly (see [`SignFrame::random_noise_only`]).
pub fn run_trials(
    config: &ScenarioConfig,
    stats: StatSet,
    trials: usize,
    plan: StreamPlan,
    workers: usize,
) -> Result<TrialBatchResult> {
    config.validate()?;
    if trials as u64 >= 1 << 32 {
        return Err(EmrError::InvalidConfig(format!("too many trials per point: {trials}")));
    }
    let direct_signs = config.hypothesis == Hypothesis::H0 && stats == StatSet::ONE_BIT;
    let pairs = parallel_map(trials, workers, |t| {
        let mut stream = plan.stream(t as u64);
        if direct_signs {
            let z = SignFrame::random_noise_only(config.m, config.n, &mut stream);
            return Ok((emr_one_bit_from_signs(&z), f64::NAN));
        }
        let frame = generate_frame(config, &mut stream)?;
        let one_bit = if stats.one_bit { emr_one_bit_from_signs(&one_bit_quantize(&frame)) } else { f64::NAN };
        let full = if stats.full { emr_full(&full_res_scm(&frame)?)? } else { f64::NAN };
        Ok((one_bit, full))
    })?;
    let mut out = TrialBatchResult::default();
    if stats.one_bit {
        out.one_bit = pairs.iter().map(|p| p.0).collect();
    }
    if stats.full {
        out.full = pairs.iter().map(|p| p.1).collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_preserves_order() {
        let v = parallel_map(103, 4, |i| Ok(i * i)).unwrap();
        assert_eq!(v, (0..103).map(|i| i * i).collect::<Vec<_>>());
        assert!(parallel_map(0, 3, Ok).unwrap().is_empty());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = ScenarioConfig::single_pu(4, 32, -3.0, -1.0);
        let plan = StreamPlan::new(77, tags::AD_HOC, 3);
        let a = run_trials(&cfg, StatSet::BOTH, 50, plan, 1).unwrap();
        let b = run_trials(&cfg, StatSet::BOTH, 50, plan, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.one_bit.len(), 50);
    }

    #[test]
    fn errors_propagate_from_workers() {
        let r: Result<Vec<usize>> =
            parallel_map(10, 2, |i| if i == 7 { Err(EmrError::Degenerate("x".into())) } else { Ok(i) });
        assert!(r.is_err());
    }
}
