//! Flop and transistor accounting for the two EMR pipelines.
//!
//! An 8-bit complex flop needs a multiplier (748 transistors) on each of
//! the I and Q rails plus a full adder (10 transistors): 1506 transistors. A one-bit
//! multiply is an XNOR gate of 2 transistors, but the stacked real/imaginary
//! layout quadruples the flop count.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CostScheme {
    EightBit,
    OneBit,
}

impl CostScheme {
    pub fn transistors_per_flop(self) -> u128 {
        match self {
            CostScheme::EightBit => 2 * MULTIPLIER_8BIT + FULL_ADDER_8BIT,
            CostScheme::OneBit => XNOR_GATE,
        }
    }

    fn flop_multiplier(self) -> u128 {
        match self {
            CostScheme::EightBit => 1,
            CostScheme::OneBit => 4,
        }
    }
}

impl fmt::Display for CostScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostScheme::EightBit => "8-bit",
            CostScheme::OneBit => "1-bit",
        })
    }
}

pub const MULTIPLIER_8BIT: u128 = 748;
pub const FULL_ADDER_8BIT: u128 = 10;
pub const XNOR_GATE: u128 = 2;

/// `m^2 (n + 1)` for 8-bit, four times that for one-bit.
///
/// Panics if the count exceeds `u128`, which needs `m` beyond about `2^60`;
/// see [`checked_flop_count`].
pub fn flop_count(scheme: CostScheme, m: u64, n: u64) -> u128 {
    checked_flop_count(scheme, m, n).expect("flop count overflows u128")
}

/// `1506 m^2 (n + 1)` for 8-bit, `8 m^2 (n + 1)` for one-bit.
pub fn transistor_count(scheme: CostScheme, m: u64, n: u64) -> u128 {
    checked_transistor_count(scheme, m, n).expect("transistor count overflows u128")
}

pub fn checked_flop_count(scheme: CostScheme, m: u64, n: u64) -> Option<u128> {
    let m = m as u128;
    (m * m).checked_mul(n as u128 + 1)?.checked_mul(scheme.flop_multiplier())
}

pub fn checked_transistor_count(scheme: CostScheme, m: u64, n: u64) -> Option<u128> {
    checked_flop_count(scheme, m, n)?.checked_mul(scheme.transistors_per_flop())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub scheme: CostScheme,
    pub m: u64,
    pub n: u64,
    pub flops: u128,
    pub transistors: u128,
}

impl CostReport {
    pub fn new(scheme: CostScheme, m: u64, n: u64) -> Self {
        Self { scheme, m, n, flops: flop_count(scheme, m, n), transistors: transistor_count(scheme, m, n) }
    }
}
