//! Special functions, probabilities and the random source.

mod rng;
mod special;

pub use rng::{gaussian_draw, stream_id, RngStream};
pub use special::{
    chi_square_cdf, chi_square_pdf, chi_square_quantile, chi_square_sf, gamma_p, gamma_q, ln_gamma, std_normal_cdf,
    std_normal_quantile, upper_normal_quantile,
};

use crate::error::{domain, Result};

/// A probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            domain(format!("probability must lie in [0, 1], got {value}"))
        }
    }

    /// Like [`Probability::new`] but also rejects the endpoints.
    pub fn open(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            domain(format!("probability must lie in (0, 1), got {value}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = crate::error::EmrError;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}
