//! Raw snapshot synthesis for the noise-only and signal-present hypotheses.
//!
//! Under `H1` each snapshot is `x(t) = sum_d a(theta_d) s_d(t) + w(t)` where
//! `a` is a half-wavelength ULA steering vector, `s_d(t) ~ CN(0, sigma_s^2)`
//! and `w(t) ~ CN(0, tau I)`. `CN(0, v)` means real and imaginary parts are
//! each `N(0, v/2)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{EmrError, Result};
use crate::numerics::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    H0,
    H1,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
        })
    }
}

/// Full description of a sensing scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub m: usize,
    pub n: usize,
    pub noise_power: f64,
    /// Per-PU signal power.
    pub signal_power: f64,
    /// One arrival angle per PU, radians in `(-pi/2, pi/2)`.
    pub pu_angles: Vec<f64>,
    pub hypothesis: Hypothesis,
}

impl ScenarioConfig {
    pub fn noise_only(m: usize, n: usize) -> Self {
        Self { m, n, noise_power: 1.0, signal_power: 0.0, pu_angles: Vec::new(), hypothesis: Hypothesis::H0 }
    }

    /// Single PU at `angle` with unit noise power and the given SNR in dB.
    pub fn single_pu(m: usize, n: usize, snr_db: f64, angle: f64) -> Self {
        Self {
            m,
            n,
            noise_power: 1.0,
            signal_power: db_to_linear(snr_db),
            pu_angles: vec![angle],
            hypothesis: Hypothesis::H1,
        }
    }

    pub fn with_noise_power(mut self, tau: f64) -> Self {
        if self.hypothesis == Hypothesis::H1 {
            // keep the SNR fixed
            self.signal_power *= tau / self.noise_power;
        }
        self.noise_power = tau;
        self
    }

    pub fn pu_count(&self) -> usize {
        self.pu_angles.len()
    }

    /// `c = m / n`.
    pub fn c(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn snr(&self) -> f64 {
        self.signal_power / self.noise_power
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EmrError::InvalidConfig(msg));
        if self.m == 0 || self.n == 0 {
            return bad(format!("m and n must be positive (m={}, n={})", self.m, self.n));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return bad(format!("noise power must be positive, got {}", self.noise_power));
        }
        if let Hypothesis::H1 = self.hypothesis {
            if self.pu_angles.is_empty() {
                return bad("H1 needs at least one PU".into());
            }
            if !(self.signal_power > 0.0 && self.signal_power.is_finite()) {
                return bad(format!("H1 needs positive signal power, got {}", self.signal_power));
            }
            if let Some(a) = self.pu_angles.iter().find(|a| !(a.abs() < FRAC_PI_2)) {
                return bad(format!("PU angle {a} outside (-pi/2, pi/2)"));
            }
        }
        Ok(())
    }

    /// Angles that actually contribute signal (empty under `H0`).
    fn active_angles(&self) -> &[f64] {
        match self.hypothesis {
            Hypothesis::H0 => &[],
            Hypothesis::H1 => &self.pu_angles,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// ULA steering vector with half-wavelength spacing: `a_k = exp(i pi k sin(angle))`.
pub fn steering_vector(angle: f64, m: usize) -> Result<Vec<Complex64>> {
    if !(angle.abs() < FRAC_PI_2) {
        return Err(EmrError::Domain(format!("steering angle {angle} outside (-pi/2, pi/2)")));
    }
    let phase = PI * angle.sin();
    Ok((0..m)
        .map(|k| if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::from_polar(1.0, phase * k as f64) })
        .collect())
}

/// An `m x m` Hermitian matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationCovariance {
    m: usize,
    entries: Vec<Complex64>,
}

impl PopulationCovariance {
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
}

/// `R = tau I + sigma_s^2 sum_d a_d a_d^H`.
pub fn population_covariance(config: &ScenarioConfig) -> Result<PopulationCovariance> {
    config.validate()?;
    let m = config.m;
    let mut entries = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        entries[i * m + i].re = config.noise_power;
    }
    for &angle in config.active_angles() {
        let a = steering_vector(angle, m)?;
        for i in 0..m {
            for j in 0..m {
                entries[i * m + j] += config.signal_power * a[i] * a[j].conj();
            }
        }
    }
    PopulationCovariance::from_entries(m, entries)
}

/// `m x n` complex snapshot matrix; column `t` is `x(t)`.
///
/// Real and imaginary parts live in separate row-major planes so per-antenna
/// rows are contiguous for the covariance kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexFrame {
    m: usize,
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexFrame {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self { m, n, re: vec![0.0; m * n], im: vec![0.0; m * n] }
    }

    /// Builds a frame from snapshot columns.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let n = columns.len();
        let m = columns.first().map_or(0, Vec::len);
        let mut f = Self::zeros(m, n);
        for (t, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(EmrError::DimensionMismatch { expected: m, actual: col.len() });
            }
            for (k, x) in col.iter().enumerate() {
                f.set(k, t, *x);
            }
        }
        Ok(f)
    }

    /// Builds a frame from row-major real and imaginary planes.
    pub fn from_planes(m: usize, n: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        for plane in [&re, &im] {
            if plane.len() != m * n {
                return Err(EmrError::DimensionMismatch { expected: m * n, actual: plane.len() });
            }
        }
        Ok(Self { m, n, re, im })
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    pub fn samples(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, t: usize) -> Complex64 {
        let idx = k * self.n + t;
        Complex64::new(self.re[idx], self.im[idx])
    }

    pub fn set(&mut self, k: usize, t: usize, x: Complex64) {
        let idx = k * self.n + t;
        self.re[idx] = x.re;
        self.im[idx] = x.im;
    }

    pub fn re_row(&self, k: usize) -> &[f64] {
        &self.re[k * self.n..(k + 1) * self.n]
    }

    pub fn im_row(&self, k: usize) -> &[f64] {
        &self.im[k * self.n..(k + 1) * self.n]
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            re: self.re.iter().map(|v| v * alpha).collect(),
            im: self.im.iter().map(|v| v * alpha).collect(),
        }
    }

    /// Multiplies antenna row `k` by `gains[k]`.
    pub fn scaled_rows(&self, gains: &[f64]) -> Self {
        let mut out = self.clone();
        for (k, g) in gains.iter().enumerate().take(self.m) {
            for v in &mut out.re[k * self.n..(k + 1) * self.n] {
                *v *= g;
            }
            for v in &mut out.im[k * self.n..(k + 1) * self.n] {
                *v *= g;
            }
        }
        out
    }
}

/// Draws one frame of `config.n` i.i.d. snapshots from `CN(0, R)`.
///
/// Draw order per snapshot: every PU symbol first, then the `m` noise
/// entries, each as a (real, imaginary) normal pair.
pub fn generate_frame(config: &ScenarioConfig, stream: &mut RngStream) -> Result<ComplexFrame> {
    config.validate()?;
    let (m, n) = (config.m, config.n);
    let steering = config.active_angles().iter().map(|&a| steering_vector(a, m)).collect::<Result<Vec<_>>>()?;
    let noise_sd = (0.5 * config.noise_power).sqrt();
    let signal_sd = (0.5 * config.signal_power).sqrt();

    let mut frame = ComplexFrame::zeros(m, n);
    let mut symbols = vec![Complex64::new(0.0, 0.0); steering.len()];
    for t in 0..n {
        for s in symbols.iter_mut() {
            let (a, b) = stream.gaussian_pair();
            *s = Complex64::new(a * signal_sd, b * signal_sd);
        }
        for k in 0..m {
            let (a, b) = stream.gaussian_pair();
            let mut x = Complex64::new(a * noise_sd, b * noise_sd);
            for (sv, s) in steering.iter().zip(&symbols) {
                x += sv[k] * s;
            }
            frame.set(k, t, x);
        }
    }
    Ok(frame)
}
