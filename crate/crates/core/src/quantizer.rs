//! One-bit quantization and the two sample covariance matrices.
//!
//! A [`SignFrame`] stacks the signs of the real parts (rows `0..m`) over the
//! signs of the imaginary parts (rows `m..2m`). Rows are bit-packed along
//! time, bit set meaning `+1`, so every one-bit SCM entry reduces to an XOR
//! and a popcount and is accumulated as an exact integer.

use num_complex::Complex64;

use crate::error::{EmrError, Result};
use crate::numerics::RngStream;
use crate::signal::{ComplexFrame, PopulationCovariance};

/// Dense row-major real square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl RealMatrix {
    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(EmrError::DimensionMismatch { expected: dim * dim, actual: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// `2m x n` matrix of one-bit samples in `{-1, +1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignFrame {
    rows: usize,
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl SignFrame {
    fn empty(rows: usize, n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        Self { rows, n, words_per_row, bits: vec![0; rows * words_per_row] }
    }

    /// Builds a frame from a `rows x n` matrix of signs; any non-negative
    /// value counts as `+1`.
    pub fn from_signs(rows: usize, n: usize, signs: &[i8]) -> Result<Self> {
        if signs.len() != rows * n {
            return Err(EmrError::DimensionMismatch { expected: rows * n, actual: signs.len() });
        }
        if !rows.is_multiple_of(2) {
            return Err(EmrError::InvalidConfig(format!("sign frame needs an even row count, got {rows}")));
        }
        let mut f = Self::empty(rows, n);
        for r in 0..rows {
            for t in 0..n {
                if signs[r * n + t] >= 0 {
                    f.set_positive(r, t);
                }
            }
        }
        Ok(f)
    }

    /// Noise-only one-bit frame drawn directly as fair coin flips.
    ///
    /// Under `H0` the `2m` real components are i.i.d. zero-mean Gaussians,
    /// so their signs are exactly i.i.d. uniform on `{-1, +1}`; this has the
    /// same law as quantizing a generated noise frame at a fraction of the
    /// cost.
    pub fn random_noise_only(m: usize, n: usize, stream: &mut RngStream) -> Self {
        let mut f = Self::empty(2 * m, n);
        let tail = n % 64;
        let mask = if tail == 0 { u64::MAX } else { (1u64 << tail) - 1 };
        for r in 0..f.rows {
            let row = &mut f.bits[r * f.words_per_row..(r + 1) * f.words_per_row];
            for w in row.iter_mut() {
                *w = stream.next_u64();
            }
            if let Some(last) = row.last_mut() {
                *last &= mask;
            }
        }
        f
    }

    #[inline]
    fn set_positive(&mut self, r: usize, t: usize) {
        self.bits[r * self.words_per_row + t / 64] |= 1u64 << (t % 64);
    }

    /// Number of rows, `2m`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn antennas(&self) -> usize {
        self.rows / 2
    }

    pub fn samples(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, t: usize) -> i8 {
        if self.bits[r * self.words_per_row + t / 64] >> (t % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// `n * S_ij = sum_t z_i(t) z_j(t)`, exactly.
    #[inline]
    pub fn correlation_sum(&self, i: usize, j: usize) -> i64 {
        let disagree: u32 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| (a ^ b).count_ones()).sum();
        self.n as i64 - 2 * disagree as i64
    }

    /// `sum_{i<j} (n S_ij)^2` as an exact integer.
    pub fn off_diagonal_square_sum(&self) -> u128 {
        let mut total: u128 = 0;
        for i in 0..self.rows {
            let mut row_total: u64 = 0;
            for j in i + 1..self.rows {
                let c = self.correlation_sum(i, j);
                row_total += (c * c) as u64;
            }
            total += row_total as u128;
        }
        total
    }

    /// Strict upper triangle of `S` in column order
    /// `S_{1,2}, S_{1,3}, S_{2,3}, ..., S_{2m-1,2m}`.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.n as f64;
        let mut out = Vec::with_capacity(self.rows * (self.rows - 1) / 2);
        for j in 1..self.rows {
            for i in 0..j {
                out.push(self.correlation_sum(i, j) as f64 / n);
            }
        }
        out
    }
}

/// `sgn` with the convention `sgn(0) = +1`.
pub fn one_bit_quantize(frame: &ComplexFrame) -> SignFrame {
    let (m, n) = (frame.antennas(), frame.samples());
    let mut out = SignFrame::empty(2 * m, n);
    for k in 0..m {
        for (t, v) in frame.re_row(k).iter().enumerate() {
            if *v >= 0.0 {
                out.set_positive(k, t);
            }
        }
        for (t, v) in frame.im_row(k).iter().enumerate() {
            if *v >= 0.0 {
                out.set_positive(m + k, t);
            }
        }
    }
    out
}

/// The `2m x 2m` one-bit SCM `S = (1/n) sum_t z(t) z(t)^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBitScm(RealMatrix);

impl OneBitScm {
    /// Wraps an arbitrary matrix, checking the shape invariants: even
    /// dimension, exact symmetry, unit diagonal, entries in `[-1, 1]`.
    pub fn from_matrix(matrix: RealMatrix) -> Result<Self> {
        let d = matrix.dim();
        if d == 0 || !d.is_multiple_of(2) {
            return Err(EmrError::InvalidConfig(format!("one-bit SCM needs even positive dimension, got {d}")));
        }
        for i in 0..d {
            if matrix.get(i, i) != 1.0 {
                return Err(EmrError::InvalidConfig(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                let v = matrix.get(i, j);
                if v != matrix.get(j, i) || !(-1.0..=1.0).contains(&v) {
                    return Err(EmrError::InvalidConfig(format!("entry ({i},{j}) breaks symmetry or bounds")));
                }
            }
        }
        Ok(Self(matrix))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.0
    }
}

pub fn one_bit_scm(frame: &SignFrame) -> Result<OneBitScm> {
    if frame.samples() == 0 {
        return Err(EmrError::Degenerate("one-bit SCM of an empty frame".into()));
    }
    let d = frame.rows();
    let n = frame.samples() as f64;
    let mut entries = vec![0.0; d * d];
    for i in 0..d {
        entries[i * d + i] = 1.0;
        for j in i + 1..d {
            let v = frame.correlation_sum(i, j) as f64 / n;
            entries[i * d + j] = v;
            entries[j * d + i] = v;
        }
    }
    Ok(OneBitScm(RealMatrix { dim: d, entries }))
}

/// The `m x m` full-resolution SCM `Phi = (1/n) sum_t x(t) x(t)^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullResScm {
    m: usize,
    entries: Vec<Complex64>,
}

impl FullResScm {
    pub fn from_entries(m: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(EmrError::DimensionMismatch { expected: m * m, actual: entries.len() });
        }
        Ok(Self { m, entries })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.m + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.m).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

const LANES: usize = 4;

/// `sum_t a(t) conj(b(t))` over split planes, in four independent lanes so
/// the loop vectorizes.
#[inline]
fn cross_sum(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> Complex64 {
    let mut re = [0.0; LANES];
    let mut im = [0.0; LANES];
    let chunks = ar.len() / LANES;
    for c in 0..chunks {
        let o = c * LANES;
        for l in 0..LANES {
            let (xr, xi, yr, yi) = (ar[o + l], ai[o + l], br[o + l], bi[o + l]);
            re[l] += xr * yr + xi * yi;
            im[l] += xi * yr - xr * yi;
        }
    }
    let mut tr = (re[0] + re[1]) + (re[2] + re[3]);
    let mut ti = (im[0] + im[1]) + (im[2] + im[3]);
    for t in chunks * LANES..ar.len() {
        tr += ar[t] * br[t] + ai[t] * bi[t];
        ti += ai[t] * br[t] - ar[t] * bi[t];
    }
    Complex64::new(tr, ti)
}

pub fn full_res_scm(frame: &ComplexFrame) -> Result<FullResScm> {
    let (m, n) = (frame.antennas(), frame.samples());
    if n == 0 {
        return Err(EmrError::Degenerate("full-resolution SCM of an empty frame".into()));
    }
    let scale = 1.0 / n as f64;
    let mut entries = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        let (ir, ii) = (frame.re_row(i), frame.im_row(i));
        let diag: f64 = ir.iter().zip(ii).map(|(a, b)| a * a + b * b).sum();
        entries[i * m + i] = Complex64::new(diag * scale, 0.0);
        for j in i + 1..m {
            let v = cross_sum(ir, ii, frame.re_row(j), frame.im_row(j)) * scale;
            entries[i * m + j] = v;
            entries[j * m + i] = v.conj();
        }
    }
    Ok(FullResScm { m, entries })
}

/// Expected one-bit SCM for Gaussian snapshots with covariance `R`.
///
/// Forms the covariance of `[x^R; x^I]`,
/// `Sigma = 1/2 [[Re R, -Im R], [Im R, Re R]]`, and maps each normalized
/// entry through `(2/pi) asin(.)`.
pub fn arcsin_expected_scm(r: &PopulationCovariance) -> Result<RealMatrix> {
    let m = r.dim();
    let d = 2 * m;
    let mut sigma = vec![0.0; d * d];
    for i in 0..m {
        for j in 0..m {
            let z = r.get(i, j);
            sigma[i * d + j] = 0.5 * z.re;
            sigma[(i + m) * d + (j + m)] = 0.5 * z.re;
            sigma[i * d + (j + m)] = -0.5 * z.im;
            sigma[(i + m) * d + j] = 0.5 * z.im;
        }
    }
    if !is_positive_definite(&sigma, d) {
        return Err(EmrError::Domain("composite covariance is not positive definite".into()));
    }
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let rho = sigma[i * d + j] / (sigma[i * d + i] * sigma[j * d + j]).sqrt();
            out[i * d + j] = if i == j { 1.0 } else { std::f64::consts::FRAC_2_PI * rho.clamp(-1.0, 1.0).asin() };
        }
    }
    RealMatrix::from_entries(d, out)
}

fn is_positive_definite(a: &[f64], d: usize) -> bool {
    let mut l = vec![0.0; d * d];
    for j in 0..d {
        if (0..j).any(|i| (a[i * d + j] - a[j * d + i]).abs() > 1e-12 * (1.0 + a[i * d + j].abs())) {
            return false;
        }
        let mut s = a[j * d + j];
        for k in 0..j {
            s -= l[j * d + k] * l[j * d + k];
        }
        if !(s > 0.0) {
            return false;
        }
        let ljj = s.sqrt();
        l[j * d + j] = ljj;
        for i in j + 1..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = s / ljj;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{generate_frame, population_covariance, ScenarioConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quantize_extracts_signs_in_stacked_order() {
        let f = ComplexFrame::from_columns(&[vec![c(3.0, 4.0), c(-1.0, 0.5)]]).unwrap();
        let z = one_bit_quantize(&f);
        let col: Vec<i8> = (0..4).map(|r| z.get(r, 0)).collect();
        assert_eq!(col, vec![1, -1, 1, 1]);
    }

    #[test]
    fn zero_maps_to_plus_one() {
        let f = ComplexFrame::from_columns(&[vec![c(0.0, -2.0)]]).unwrap();
        let z = one_bit_quantize(&f);
        assert_eq!((z.get(0, 0), z.get(1, 0)), (1, -1));
    }

    #[test]
    fn quantize_is_scale_invariant() {
        let cfg = ScenarioConfig::single_pu(3, 70, 0.0, 0.3);
        let f = generate_frame(&cfg, &mut RngStream::new(2, 2)).unwrap();
        assert_eq!(one_bit_quantize(&f), one_bit_quantize(&f.scaled(17.5)));
        assert_eq!(one_bit_quantize(&f), one_bit_quantize(&f.scaled_rows(&[0.1, 4.0, 9.0])));
    }

    #[test]
    fn single_all_plus_snapshot_gives_all_ones() {
        let z = SignFrame::from_signs(4, 1, &[1, 1, 1, 1]).unwrap();
        let s = one_bit_scm(&z).unwrap();
        assert!(s.matrix().entries().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn opposite_snapshots_cancel_in_products() {
        let z1 = SignFrame::from_signs(4, 1, &[1, -1, 1, -1]).unwrap();
        let z2 = SignFrame::from_signs(4, 2, &[1, -1, -1, 1, 1, -1, -1, 1]).unwrap();
        assert_eq!(one_bit_scm(&z1).unwrap(), one_bit_scm(&z2).unwrap());
    }

    #[test]
    fn scm_entries_live_on_the_lattice() {
        let n = 37;
        let z = SignFrame::random_noise_only(3, n, &mut RngStream::new(4, 4));
        let s = one_bit_scm(&z).unwrap();
        for i in 0..6 {
            assert_eq!(s.get(i, i), 1.0);
            for j in 0..6 {
                let v = s.get(i, j) * n as f64;
                assert!((v - v.round()).abs() < 1e-9 && (v.round() as i64 - n as i64) % 2 == 0);
                assert_eq!(s.get(i, j), s.get(j, i));
            }
        }
    }

    #[test]
    fn noise_only_off_diagonals_shrink() {
        let n = 10_000;
        let z = SignFrame::random_noise_only(4, n, &mut RngStream::new(8, 0));
        let s = one_bit_scm(&z).unwrap();
        let bound = 5.0 / (n as f64).sqrt();
        for i in 0..8 {
            for j in i + 1..8 {
                assert!(s.get(i, j).abs() < bound);
            }
        }
    }

    #[test]
    fn random_frame_masks_tail_bits() {
        let z = SignFrame::random_noise_only(2, 70, &mut RngStream::new(1, 1));
        for r in 0..4 {
            assert_eq!(z.row(r)[1] >> 6, 0);
        }
        assert_eq!(z.correlation_sum(0, 0), 70);
    }

    #[test]
    fn full_res_single_snapshot_is_outer_product() {
        let x = vec![c(1.0, 2.0), c(-0.5, 0.25), c(0.0, -3.0)];
        let f = ComplexFrame::from_columns(std::slice::from_ref(&x)).unwrap();
        let phi = full_res_scm(&f).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((phi.get(i, j) - x[i] * x[j].conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn full_res_scales_quadratically() {
        let cfg = ScenarioConfig::single_pu(5, 33, 0.0, 0.1);
        let f = generate_frame(&cfg, &mut RngStream::new(3, 0)).unwrap();
        let a = full_res_scm(&f).unwrap();
        let b = full_res_scm(&f.scaled(3.0)).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert!((x * 9.0 - y).norm() < 1e-12 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn full_res_is_hermitian_with_real_diagonal() {
        let cfg = ScenarioConfig::single_pu(6, 50, 3.0, -0.7);
        let f = generate_frame(&cfg, &mut RngStream::new(3, 1)).unwrap();
        let p = full_res_scm(&f).unwrap();
        for i in 0..6 {
            assert_eq!(p.get(i, i).im, 0.0);
            assert!(p.get(i, i).re >= 0.0);
            for j in 0..6 {
                assert!((p.get(i, j) - p.get(j, i).conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn noise_only_diagonal_concentrates() {
        let cfg = ScenarioConfig::noise_only(2, 100_000);
        let f = generate_frame(&cfg, &mut RngStream::new(11, 0)).unwrap();
        let p = full_res_scm(&f).unwrap();
        for i in 0..2 {
            assert!((0.99..=1.01).contains(&p.get(i, i).re));
        }
    }

    #[test]
    fn arcsin_map_of_white_noise_is_identity() {
        let r = population_covariance(&ScenarioConfig::noise_only(3, 1).with_noise_power(4.0)).unwrap();
        assert_eq!(arcsin_expected_scm(&r).unwrap(), RealMatrix::identity(6));
    }

    #[test]
    fn arcsin_of_full_correlation_is_one() {
        // Nearly rank-one: correlation between antennas tends to 1.
        let r = PopulationCovariance::from_entries(
            2,
            vec![c(1.0, 0.0), c(1.0 - 1e-12, 0.0), c(1.0 - 1e-12, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let e = arcsin_expected_scm(&r).unwrap();
        assert!((e.get(0, 1) - 1.0).abs() < 1e-5);
        assert!(e.get(0, 2).abs() < 1e-12);
    }

    #[test]
    fn arcsin_rejects_indefinite() {
        let r =
            PopulationCovariance::from_entries(2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(arcsin_expected_scm(&r).is_err());
    }

    #[test]
    fn one_bit_scm_validation() {
        assert!(OneBitScm::from_matrix(RealMatrix::identity(3)).is_err());
        let mut bad = RealMatrix::identity(4);
        bad.entries[1] = 0.5;
        assert!(OneBitScm::from_matrix(bad).is_err());
    }
}
