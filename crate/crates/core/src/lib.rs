//! One-bit and full-resolution eigenvalue-moment-ratio (EMR) spectrum sensing.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: normal / chi-square special functions and a stream-addressable RNG.
//! * [`signal`]: ULA snapshot synthesis under `H0` and `H1`.
//! * [`quantizer`]: one-bit quantization, both sample covariance matrices and the arcsin-law map.
//! * [`detector`]: EMR statistics, the three closed-form CFAR thresholds and the decision rule.
//! * [`montecarlo`]: reproducible trials, empirical thresholds, sweeps and null-law diagnostics.
//! * [`cost`]: flop and transistor accounting.
//! * [`cli`]: the `onebit-emr` command line front end.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cost;
pub mod detector;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod quantizer;
pub mod signal;

pub use error::{EmrError, Result};
