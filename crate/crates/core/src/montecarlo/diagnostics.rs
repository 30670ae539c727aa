//! Checks on the noise-only law of the one-bit SCM and statistic.

use crate::detector::dof;
use crate::error::{EmrError, Result};
use crate::numerics::{chi_square_cdf, std_normal_cdf};
use crate::quantizer::SignFrame;

use super::engine::{parallel_map, StreamPlan};

/// 1-based column index of `(i, j)`, `1 <= i < j`, in the upper-triangle
/// vector `S_{1,2}, S_{1,3}, S_{2,3}, S_{1,4}, ...`: `p = i + (j-1)(j-2)/2`.
pub fn upper_tri_index(i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j);
    i + (j - 1) * (j - 2) / 2
}

/// Inverse of [`upper_tri_index`].
pub fn upper_tri_pair(p: usize) -> (usize, usize) {
    debug_assert!(p >= 1);
    // largest j with (j-1)(j-2)/2 < p
    let mut j = 2;
    while j * (j - 1) / 2 < p {
        j += 1;
    }
    (p - (j - 1) * (j - 2) / 2, j)
}

/// One-sample Kolmogorov-Smirnov distance between `samples` and `cdf`.
/// Ties are handled exactly, so lattice-valued samples are fine.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS distance `d` from `n` samples (Stephens'
/// small-sample correction on the Kolmogorov series).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Noise-only samples of `sqrt(n) S_{1,2}` and `m n (xi - 1)` drawn from the
/// same trials.
#[derive(Clone, Debug, PartialEq)]
pub struct NullSamples {
    pub m: usize,
    pub n: usize,
    pub scaled_entry: Vec<f64>,
    pub scaled_statistic: Vec<f64>,
}

pub fn null_samples(m: usize, n: usize, trials: usize, plan: StreamPlan, workers: usize) -> Result<NullSamples> {
    if m == 0 || n == 0 {
        return Err(EmrError::InvalidConfig(format!("m and n must be positive (m={m}, n={n})")));
    }
    let pairs = parallel_map(trials, workers, |t| {
        let z = SignFrame::random_noise_only(m, n, &mut plan.stream(t as u64));
        let entry = z.correlation_sum(0, 1) as f64 / (n as f64).sqrt();
        // m n (xi - 1) = sum_{i<j} (n S_ij)^2 / n
        let stat = z.off_diagonal_square_sum() as f64 / n as f64;
        Ok((entry, stat))
    })?;
    Ok(NullSamples {
        m,
        n,
        scaled_entry: pairs.iter().map(|p| p.0).collect(),
        scaled_statistic: pairs.iter().map(|p| p.1).collect(),
    })
}

impl NullSamples {
    /// KS distance of `sqrt(n) S_{1,2}` against `N(0, 1)`.
    pub fn ks_entry(&self) -> f64 {
        ks_statistic(&self.scaled_entry, std_normal_cdf)
    }

    /// KS distance of `m n (xi - 1)` against chi-square with `m (2m - 1)` dof.
    pub fn ks_statistic(&self) -> f64 {
        let q = dof(self.m);
        ks_statistic(&self.scaled_statistic, |x| chi_square_cdf(x.max(0.0), q).unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperTriCovariance {
    /// Largest `|corr(r_p, r_l)|` over `p != l`.
    pub max_offdiag_corr: f64,
    /// Estimated `E[r_p^2]` for every `p`.
    pub diag: Vec<f64>,
    pub n: usize,
    pub trials: usize,
}

impl UpperTriCovariance {
    /// Worst relative deviation of the diagonal from `1/n`.
    pub fn max_diag_relative_error(&self) -> f64 {
        let target = 1.0 / self.n as f64;
        self.diag.iter().map(|d| (d - target).abs() / target).fold(0.0, f64::max)
    }
}

const BLOCK: usize = 256;

/// Estimates `C_r = E[r r^T]` for the noise-only upper-triangle vector `r`
/// from `trials` independent frames.
///
/// Products of SCM entries are accumulated as exact integers
/// (`n S_ij` is an integer), so the estimate does not depend on how trials
/// are split across workers.
pub fn upper_tri_covariance(
    m: usize,
    n: usize,
    trials: usize,
    plan: StreamPlan,
    workers: usize,
) -> Result<UpperTriCovariance> {
    if m == 0 || n == 0 || trials < 2 {
        return Err(EmrError::InvalidConfig(format!(
            "need m, n >= 1 and at least two trials (m={m}, n={n}, trials={trials})"
        )));
    }
    let rows = 2 * m;
    let q = rows * (rows - 1) / 2;
    let tri = q * (q + 1) / 2;
    let blocks = trials.div_ceil(BLOCK);
    let partials = parallel_map(blocks, workers, |b| {
        let mut acc = vec![0i128; tri];
        let mut r = vec![0i64; q];
        for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
            let z = SignFrame::random_noise_only(m, n, &mut plan.stream(t as u64));
            let mut p = 0;
            for j in 1..rows {
                for i in 0..j {
                    r[p] = z.correlation_sum(i, j);
                    p += 1;
                }
            }
            let mut idx = 0;
            for a in 0..q {
                let ra = r[a] as i128;
                for &rb in &r[a..] {
                    acc[idx] += ra * rb as i128;
                    idx += 1;
                }
            }
        }
        Ok(acc)
    })?;
    let mut total = vec![0i128; tri];
    for part in partials {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    let scale = 1.0 / (trials as f64 * (n as f64) * (n as f64));
    let row_start = |a: usize| a * q - a * (a.saturating_sub(1)) / 2;
    let at = |a: usize, b: usize| total[row_start(a) + (b - a)] as f64 * scale;
    let diag: Vec<f64> = (0..q).map(|a| at(a, a)).collect();
    let mut max_corr = 0.0_f64;
    for a in 0..q {
        for b in a + 1..q {
            let c = at(a, b) / (diag[a] * diag[b]).sqrt();
            max_corr = max_corr.max(c.abs());
        }
    }
    Ok(UpperTriCovariance { max_offdiag_corr: max_corr, diag, n, trials })
}

/// Tolerances for the three null-law checks.
pub const KS_TOLERANCE: f64 = 0.02;
pub const CORRELATION_TOLERANCE: f64 = 0.05;
pub const DIAGONAL_TOLERANCE: f64 = 0.10;

#[derive(Clone, Debug, PartialEq)]
pub struct NullDiagnostics {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub ks_entry: f64,
    pub ks_statistic: f64,
    pub covariance: UpperTriCovariance,
}

impl NullDiagnostics {
    pub fn entry_passes(&self) -> bool {
        self.ks_entry < KS_TOLERANCE
    }

    pub fn statistic_passes(&self) -> bool {
        self.ks_statistic < KS_TOLERANCE
    }

    pub fn covariance_passes(&self) -> bool {
        self.covariance.max_offdiag_corr < CORRELATION_TOLERANCE
            && self.covariance.max_diag_relative_error() < DIAGONAL_TOLERANCE
    }
}

/// All three null checks; the covariance diagnostic reuses the same trials.
pub fn run_null_diagnostics(
    m: usize,
    n: usize,
    trials: usize,
    plan: StreamPlan,
    workers: usize,
) -> Result<NullDiagnostics> {
    let samples = null_samples(m, n, trials, plan, workers)?;
    let covariance = upper_tri_covariance(m, n, trials, plan, workers)?;
    Ok(NullDiagnostics { m, n, trials, ks_entry: samples.ks_entry(), ks_statistic: samples.ks_statistic(), covariance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::tags;

    #[test]
    fn index_map_round_trip() {
        let m = 5;
        let mut expected = 1;
        for j in 2..=2 * m {
            for i in 1..j {
                let p = upper_tri_index(i, j);
                assert_eq!(p, expected);
                assert_eq!(upper_tri_pair(p), (i, j));
                expected += 1;
            }
        }
        assert_eq!(expected - 1, m * (2 * m - 1));
    }

    #[test]
    fn upper_triangle_vector_uses_index_map() {
        let z = SignFrame::random_noise_only(3, 50, &mut StreamPlan::new(1, tags::AD_HOC, 0).stream(0));
        let r = z.upper_triangle();
        assert_eq!(r.len(), 15);
        for j in 2..=6 {
            for i in 1..j {
                let want = z.correlation_sum(i - 1, j - 1) as f64 / 50.0;
                assert_eq!(r[upper_tri_index(i, j) - 1], want);
            }
        }
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let v: Vec<f64> =
            (0..n).map(|i| crate::numerics::std_normal_quantile((i as f64 + 0.5) / n as f64).unwrap()).collect();
        let d = ks_statistic(&v, std_normal_cdf);
        assert!((d - 0.5 / n as f64).abs() < 1e-9);
        assert!(ks_p_value(d, n) > 0.99);
        assert!(ks_p_value(0.2, 1000) < 1e-10);
    }

    #[test]
    fn ks_handles_ties() {
        // Point mass at zero against the uniform-on-[-1,1] cdf.
        let v = vec![0.0; 10];
        let d = ks_statistic(&v, |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0));
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn covariance_worker_invariant() {
        let plan = StreamPlan::new(4, tags::DIAGNOSTIC, 0);
        let a = upper_tri_covariance(2, 64, 600, plan, 1).unwrap();
        let b = upper_tri_covariance(2, 64, 600, plan, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.diag.len(), 6);
    }

    #[test]
    fn tiny_n_still_reports() {
        let d = run_null_diagnostics(2, 4, 300, StreamPlan::new(1, tags::DIAGNOSTIC, 0), 1).unwrap();
        assert!(d.ks_entry.is_finite() && d.ks_statistic.is_finite());
        assert!(d.covariance.max_offdiag_corr.is_finite());
    }
}
