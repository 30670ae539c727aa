//! Parameter sweeps behind the three experiment figures.

use std::fmt::Write as _;

use crate::detector::{threshold, ThresholdScheme, ThresholdSpec};
use crate::error::{EmrError, Result};
use crate::numerics::Probability;
use crate::signal::ScenarioConfig;

use super::engine::{run_trials, tags, StatSet, Statistic, StreamPlan};
use super::estimate::{empirical_quantile, empirical_quantile_se, relative_error, sort_ascending, RateEstimate};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

/// One axis, several named series sampled on it, and enough metadata to
/// regenerate the run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis_values: Vec<f64>,
    pub series: Vec<Series>,
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    fn new(axis_name: &str, axis_values: Vec<f64>) -> Self {
        Self { axis_name: axis_name.to_string(), axis_values, series: Vec::new(), metadata: Vec::new() }
    }

    fn push(&mut self, name: &str, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.axis_values.len());
        self.series.push(Series { name: name.to_string(), values });
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|s| s.name == name).map(|s| s.values.as_slice())
    }

    pub fn column_names(&self) -> Vec<&str> {
        std::iter::once(self.axis_name.as_str()).chain(self.series.iter().map(|s| s.name.as_str())).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.series {
            if s.values.len() != self.axis_values.len() {
                return Err(EmrError::DimensionMismatch { expected: self.axis_values.len(), actual: s.values.len() });
            }
        }
        Ok(())
    }

    /// Comma-separated, header row first, LF line endings, every number
    /// with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.column_names().join(",");
        out.push('\n');
        for (i, x) in self.axis_values.iter().enumerate() {
            out.push_str(&format_number(*x));
            for s in &self.series {
                out.push(',');
                out.push_str(&format_number(s.values[i]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        let mut s = String::new();
        let _ = write!(s, "{v:.16e}");
        s
    }
}

/// `m = round(c n)`, rejecting an empty array.
pub fn antennas_for(c: f64, n: usize) -> Result<usize> {
    let m = (c * n as f64).round();
    if m.is_nan() || m < 1.0 {
        return Err(EmrError::InvalidConfig(format!("c = {c} at n = {n} leaves no antennas")));
    }
    Ok(m as usize)
}

/// Linear interpolation of where `values` first rises through `level`.
pub fn crossing(axis: &[f64], values: &[f64], level: f64) -> Option<f64> {
    values.windows(2).zip(axis.windows(2)).find_map(|(v, a)| {
        if v[0] < level && v[1] >= level {
            Some(a[0] + (level - v[0]) / (v[1] - v[0]) * (a[1] - a[0]))
        } else {
            None
        }
    })
}

#[derive(Clone, Debug)]
pub struct ThresholdErrorSweep {
    pub c: f64,
    pub n_values: Vec<usize>,
    pub epsilon: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub workers: usize,
    /// The full-resolution series needs Gaussian frames and costs
    /// `O(m^2 n)` per trial; switch it off for fast one-bit-only runs.
    pub include_full: bool,
}

/// Relative error of each closed-form threshold against the empirical one,
/// as a function of `n` at fixed `c`.
pub fn sweep_threshold_error(p: &ThresholdErrorSweep) -> Result<SweepResult> {
    Probability::open(p.epsilon)?;
    let axis = p.n_values.iter().map(|&n| n as f64).collect();
    let mut res = SweepResult::new("n", axis);
    let len = p.n_values.len();
    let (mut exact, mut normal, mut full) = (vec![], vec![], vec![]);
    let (mut emp1, mut empf, mut se1) = (vec![], vec![], vec![]);
    for (point, &n) in p.n_values.iter().enumerate() {
        let m = antennas_for(p.c, n)?;
        let cfg = ScenarioConfig::noise_only(m, n);
        let spec = |scheme| ThresholdSpec::new(m, n, p.epsilon, scheme);

        let plan = StreamPlan::new(p.master_seed, tags::THRESHOLD_ONE_BIT, point as u32);
        let mut v = run_trials(&cfg, StatSet::ONE_BIT, p.trials, plan, p.workers)?.one_bit;
        sort_ascending(&mut v);
        let eta_emp = empirical_quantile(&v, p.epsilon)?;
        exact.push(relative_error(threshold(&spec(ThresholdScheme::OneBitExact)?)?, eta_emp));
        normal.push(relative_error(threshold(&spec(ThresholdScheme::OneBitNormal)?)?, eta_emp));
        emp1.push(eta_emp);
        se1.push(empirical_quantile_se(&v, p.epsilon)? / eta_emp);

        if p.include_full {
            let plan = StreamPlan::new(p.master_seed, tags::THRESHOLD_FULL, point as u32);
            let mut v = run_trials(&cfg, StatSet::FULL, p.trials, plan, p.workers)?.full;
            sort_ascending(&mut v);
            let eta_emp = empirical_quantile(&v, p.epsilon)?;
            full.push(relative_error(threshold(&spec(ThresholdScheme::FullRes)?)?, eta_emp));
            empf.push(eta_emp);
        }
    }
    debug_assert_eq!(exact.len(), len);
    res.push("relerr_onebit_exact", exact);
    res.push("relerr_onebit_normal", normal);
    if p.include_full {
        res.push("relerr_fullres", full);
    }
    res.push("eta_emp_onebit", emp1);
    if p.include_full {
        res.push("eta_emp_fullres", empf);
    }
    res.push("relerr_onebit_se", se1);
    res.meta("c", p.c);
    res.meta("pfa", p.epsilon);
    res.meta("trials", p.trials);
    res.meta("seed", p.master_seed);
    Ok(res)
}

/// How the Pd sweeps set their thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Closed forms: chi-square quantile for one-bit, the `1 + c` formula
    /// for full resolution.
    Theoretical,
    /// `(1 - eps)` quantiles of noise-only trials at each `(m, n)`.
    Empirical { calibration_trials: usize },
}

impl ThresholdMode {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdMode::Theoretical => "theoretical",
            ThresholdMode::Empirical { .. } => "empirical",
        }
    }
}

fn thresholds_for(
    m: usize,
    n: usize,
    epsilon: f64,
    mode: ThresholdMode,
    master_seed: u64,
    point: u32,
    workers: usize,
) -> Result<(f64, f64)> {
    match mode {
        ThresholdMode::Theoretical => Ok((
            threshold(&ThresholdSpec::new(m, n, epsilon, ThresholdScheme::OneBitExact)?)?,
            threshold(&ThresholdSpec::new(m, n, epsilon, ThresholdScheme::FullRes)?)?,
        )),
        ThresholdMode::Empirical { calibration_trials } => {
            let plan = StreamPlan::new(master_seed, tags::CALIBRATION, point);
            let batch =
                run_trials(&ScenarioConfig::noise_only(m, n), StatSet::BOTH, calibration_trials, plan, workers)?;
            let (mut a, mut b) = (batch.one_bit, batch.full);
            sort_ascending(&mut a);
            sort_ascending(&mut b);
            Ok((empirical_quantile(&a, epsilon)?, empirical_quantile(&b, epsilon)?))
        }
    }
}

struct PdColumns {
    pd1: Vec<f64>,
    pdf: Vec<f64>,
    se1: Vec<f64>,
    sef: Vec<f64>,
    thr1: Vec<f64>,
    thrf: Vec<f64>,
}

impl PdColumns {
    fn new() -> Self {
        Self { pd1: vec![], pdf: vec![], se1: vec![], sef: vec![], thr1: vec![], thrf: vec![] }
    }

    fn record(
        &mut self,
        cfg: &ScenarioConfig,
        thr: (f64, f64),
        trials: usize,
        plan: StreamPlan,
        workers: usize,
    ) -> Result<()> {
        let batch = run_trials(cfg, StatSet::BOTH, trials, plan, workers)?;
        let r1 = RateEstimate::from_values(batch.values(Statistic::OneBit), thr.0);
        let rf = RateEstimate::from_values(batch.values(Statistic::FullRes), thr.1);
        self.pd1.push(r1.rate);
        self.pdf.push(rf.rate);
        self.se1.push(r1.std_error);
        self.sef.push(rf.std_error);
        self.thr1.push(thr.0);
        self.thrf.push(thr.1);
        Ok(())
    }

    fn into_result(self, res: &mut SweepResult) {
        res.push("pd_onebit", self.pd1);
        res.push("pd_fullres", self.pdf);
        res.push("pd_onebit_se", self.se1);
        res.push("pd_fullres_se", self.sef);
        res.push("threshold_onebit", self.thr1);
        res.push("threshold_fullres", self.thrf);
    }
}

#[derive(Clone, Debug)]
pub struct PdVsSnrSweep {
    pub c: f64,
    pub n: usize,
    pub snr_db: Vec<f64>,
    pub epsilon: f64,
    pub trials: usize,
    pub pu_angle: f64,
    pub master_seed: u64,
    pub workers: usize,
    pub threshold_mode: ThresholdMode,
}

/// Detection probability of both detectors against SNR, one PU.
pub fn sweep_pd_vs_snr(p: &PdVsSnrSweep) -> Result<SweepResult> {
    Probability::open(p.epsilon)?;
    let m = antennas_for(p.c, p.n)?;
    let thr = thresholds_for(m, p.n, p.epsilon, p.threshold_mode, p.master_seed, 0, p.workers)?;
    let mut res = SweepResult::new("snr_db", p.snr_db.clone());
    let mut cols = PdColumns::new();
    for (point, &snr) in p.snr_db.iter().enumerate() {
        let cfg = ScenarioConfig::single_pu(m, p.n, snr, p.pu_angle);
        let plan = StreamPlan::new(p.master_seed, tags::DETECTION, point as u32);
        cols.record(&cfg, thr, p.trials, plan, p.workers)?;
    }
    cols.into_result(&mut res);
    res.meta("c", p.c);
    res.meta("n", p.n);
    res.meta("m", m);
    res.meta("pfa", p.epsilon);
    res.meta("trials", p.trials);
    res.meta("angle", p.pu_angle);
    res.meta("threshold_mode", p.threshold_mode.name());
    res.meta("seed", p.master_seed);
    Ok(res)
}

#[derive(Clone, Debug)]
pub struct PdVsNSweep {
    pub c: f64,
    pub n_values: Vec<usize>,
    pub snr_db: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub pu_angle: f64,
    pub master_seed: u64,
    pub workers: usize,
    pub threshold_mode: ThresholdMode,
}

/// Detection probability of both detectors against sample size at fixed
/// `c` (so `m` grows with `n`) and fixed SNR.
pub fn sweep_pd_vs_n(p: &PdVsNSweep) -> Result<SweepResult> {
    Probability::open(p.epsilon)?;
    let mut res = SweepResult::new("n", p.n_values.iter().map(|&n| n as f64).collect());
    let mut cols = PdColumns::new();
    let mut ms = vec![];
    for (point, &n) in p.n_values.iter().enumerate() {
        let m = antennas_for(p.c, n)?;
        ms.push(m as f64);
        let thr = thresholds_for(m, n, p.epsilon, p.threshold_mode, p.master_seed, point as u32, p.workers)?;
        let cfg = ScenarioConfig::single_pu(m, n, p.snr_db, p.pu_angle);
        let plan = StreamPlan::new(p.master_seed, tags::DETECTION, point as u32);
        cols.record(&cfg, thr, p.trials, plan, p.workers)?;
    }
    res.push("m", ms);
    cols.into_result(&mut res);
    res.meta("c", p.c);
    res.meta("snr_db", p.snr_db);
    res.meta("pfa", p.epsilon);
    res.meta("trials", p.trials);
    res.meta("angle", p.pu_angle);
    res.meta("threshold_mode", p.threshold_mode.name());
    res.meta("seed", p.master_seed);
    Ok(res)
}
