//! Second-order EMR statistics, their CFAR thresholds and the decision rule.

use crate::error::{domain, EmrError, Result};
use crate::numerics::{chi_square_quantile, std_normal_quantile, Probability};
use crate::quantizer::{FullResScm, OneBitScm, SignFrame};
use crate::signal::Hypothesis;

/// Which closed-form threshold to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThresholdScheme {
    /// `1 + c + sqrt(2) Q^{-1}(1 - eps) / n`.
    FullRes,
    /// `1 + F^{-1}_{chi2_q}(1 - eps) / (m n)`.
    OneBitExact,
    /// CLT approximation of the chi-square quantile.
    OneBitNormal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSpec {
    pub m: usize,
    pub n: usize,
    pub epsilon: Probability,
    pub scheme: ThresholdScheme,
}

impl ThresholdSpec {
    pub fn new(m: usize, n: usize, epsilon: f64, scheme: ThresholdScheme) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(EmrError::InvalidConfig(format!("m and n must be positive (m={m}, n={n})")));
        }
        Ok(Self { m, n, epsilon: Probability::open(epsilon)?, scheme })
    }

    pub fn c(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// Degrees of freedom of the null chi-square law, `m (2m - 1)`.
    pub fn dof(&self) -> u64 {
        dof(self.m)
    }
}

pub fn dof(m: usize) -> u64 {
    let m = m as u64;
    m * (2 * m - 1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Hypothesis,
}

/// Rejects `H0` only when the statistic strictly exceeds the threshold.
pub fn decide(statistic: f64, threshold: f64) -> DetectorOutcome {
    let decision = if statistic > threshold { Hypothesis::H1 } else { Hypothesis::H0 };
    DetectorOutcome { statistic, threshold, decision }
}

/// `m ||Phi||_F^2 / tr(Phi)^2`.
pub fn emr_full(phi: &FullResScm) -> Result<f64> {
    let tr = phi.trace();
    if tr.is_nan() || tr <= 0.0 {
        return Err(EmrError::Degenerate(format!("SCM trace must be positive, got {tr}")));
    }
    Ok(phi.dim() as f64 * phi.frobenius_sq() / (tr * tr))
}

/// `1 + (1/m) sum_{i<j} S_ij^2` for a `2m x 2m` one-bit SCM.
pub fn emr_one_bit(s: &OneBitScm, m: usize) -> Result<f64> {
    if s.dim() != 2 * m {
        return Err(EmrError::DimensionMismatch { expected: 2 * m, actual: s.dim() });
    }
    let d = s.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            let v = s.get(i, j);
            acc += v * v;
        }
    }
    Ok(1.0 + acc / m as f64)
}

/// One-bit EMR straight from the packed signs, via exact integer sums.
///
/// Agrees with `emr_one_bit(one_bit_scm(z))` up to the final rounding.
pub fn emr_one_bit_from_signs(z: &SignFrame) -> f64 {
    let m = z.antennas() as f64;
    let n = z.samples() as f64;
    1.0 + z.off_diagonal_square_sum() as f64 / (n * n * m)
}

pub fn threshold_full(spec: &ThresholdSpec) -> Result<f64> {
    expect_scheme(spec, ThresholdScheme::FullRes)?;
    let z = std_normal_quantile(spec.epsilon.complement().value())?;
    Ok(1.0 + spec.c() + std::f64::consts::SQRT_2 * z / spec.n as f64)
}

pub fn threshold_one_bit_exact(spec: &ThresholdSpec) -> Result<f64> {
    expect_scheme(spec, ThresholdScheme::OneBitExact)?;
    let x = chi_square_quantile(spec.epsilon.complement().value(), spec.dof())?;
    Ok(1.0 + x / (spec.m as f64 * spec.n as f64))
}

pub fn threshold_one_bit_normal(spec: &ThresholdSpec) -> Result<f64> {
    expect_scheme(spec, ThresholdScheme::OneBitNormal)?;
    let q = spec.dof() as f64;
    let z = std_normal_quantile(spec.epsilon.complement().value())?;
    Ok(1.0 + (2.0 * q).sqrt() / (spec.m as f64 * spec.n as f64) * (z + (0.5 * q).sqrt()))
}

/// Dispatches on `spec.scheme`.
pub fn threshold(spec: &ThresholdSpec) -> Result<f64> {
    match spec.scheme {
        ThresholdScheme::FullRes => threshold_full(spec),
        ThresholdScheme::OneBitExact => threshold_one_bit_exact(spec),
        ThresholdScheme::OneBitNormal => threshold_one_bit_normal(spec),
    }
}

fn expect_scheme(spec: &ThresholdSpec, want: ThresholdScheme) -> Result<()> {
    if spec.scheme != want {
        return Err(EmrError::InvalidConfig(format!("expected {want:?} threshold spec, got {:?}", spec.scheme)));
    }
    Ok(())
}

/// Mean and variance of a one-bit SCM entry whose per-snapshot agreement
/// probability is `p_bar`: `(2 p - 1, 4 p (1 - p) / n)`.
pub fn entry_moments(p_bar: f64, n: usize) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p_bar) {
        return domain(format!("agreement probability must lie in [0, 1], got {p_bar}"));
    }
    if n == 0 {
        return domain("sample count must be positive");
    }
    Ok((2.0 * p_bar - 1.0, 4.0 * p_bar * (1.0 - p_bar) / n as f64))
}
