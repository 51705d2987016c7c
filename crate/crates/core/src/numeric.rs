//! Scalar arithmetic shared by the orbit code.
//!
//! Everything that iterates the savings map is generic over [`Real`], so the
//! same routines run in IEEE binary64 or in a software binary float whose
//! significand width is chosen at runtime ([`Wide`]). The wide mode exists
//! because a contraction forgets one `log2(b)` bits of the initial state per
//! step while rounding keeps re-injecting error: at `P` bits of precision an
//! orbit of the chaotic map collapses onto a spurious cycle after roughly
//! `P / log2(b)` steps. Sizing `P` to the iteration horizon keeps the
//! numerical orbit faithful for the whole run.

use std::fmt;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use serde::{Deserialize, Serialize};

/// Binary floating point with round-half-to-even and caller-chosen precision.
pub type WideFloat = FBig<HalfEven, 2>;

/// Extra bits added on top of a horizon estimate.
pub const GUARD_BITS: usize = 128;

/// Minimum significand width of the extended mode.
pub const MIN_WIDE_BITS: usize = 128;

pub trait Real: Clone + PartialOrd + fmt::Debug + Send + Sync {
    type Context: Clone + fmt::Debug + Send + Sync;

    /// Converts a binary64 value; exact whenever the target precision is at
    /// least 53 bits.
    fn from_f64(x: f64, ctx: &Self::Context) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;

    /// `|self - rhs|`, rounded to binary64.
    fn distance(&self, rhs: &Self) -> f64 {
        self.sub(rhs).to_f64().abs()
    }
}

impl Real for f64 {
    type Context = ();

    fn from_f64(x: f64, _: &()) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

/// Significand width, in bits, of a [`Wide`] computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bits(pub usize);

/// A [`WideFloat`] pinned to a working precision.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Wide(pub WideFloat);

impl Wide {
    pub fn new(x: f64, bits: usize) -> Self {
        <Wide as Real>::from_f64(x, &Bits(bits))
    }

    pub fn precision(&self) -> usize {
        self.0.precision()
    }

    pub fn into_inner(self) -> WideFloat {
        self.0
    }
}

impl fmt::Debug for Wide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Wide({:e}, {} bits)", self.to_f64(), self.precision())
    }
}

impl Real for Wide {
    type Context = Bits;

    fn from_f64(x: f64, ctx: &Bits) -> Self {
        let v = WideFloat::try_from(x).expect("finite value");
        Wide(v.with_precision(ctx.0).value())
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn add(&self, rhs: &Self) -> Self {
        Wide(&self.0 + &rhs.0)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Wide(&self.0 - &rhs.0)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Wide(&self.0 * &rhs.0)
    }
    fn div(&self, rhs: &Self) -> Self {
        Wide(&self.0 / &rhs.0)
    }
}

/// Arithmetic used for orbit computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Precision {
    Double,
    Extended { bits: usize },
}

impl Precision {
    /// Precision that keeps `steps` iterations of a map with contraction
    /// factor `contraction` from collapsing onto rounding artefacts, plus
    /// `resolution_bits` of headroom for resolving nearby initial states.
    pub fn for_horizon(steps: u64, contraction: f64, resolution_bits: usize) -> Self {
        let per_step = -contraction.log2();
        let horizon = (steps as f64 * per_step).ceil().max(0.0) as usize;
        Precision::Extended {
            bits: (horizon + resolution_bits + GUARD_BITS).max(MIN_WIDE_BITS),
        }
    }

    pub fn bits(&self) -> usize {
        match self {
            Precision::Double => 53,
            Precision::Extended { bits } => *bits,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => write!(f, "double"),
            Precision::Extended { bits } => write!(f, "extended({bits} bits)"),
        }
    }
}

/// Compensated summation (Neumaier).
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_roundtrips_binary64() {
        for x in [0.0, 1.0, -0.5, 1709.8034428612914, 1e-300, 4000.0 / 3.0] {
            assert_eq!(Wide::new(x, 256).to_f64(), x);
        }
    }

    #[test]
    fn wide_keeps_bits_that_double_drops() {
        let bits = Bits(200);
        let big = Wide::from_f64(1.0, &bits);
        let tiny = Wide::from_f64(2f64.powi(-120), &bits);
        let s = big.add(&tiny);
        assert_eq!(s.to_f64(), 1.0);
        assert_eq!(s.sub(&big).to_f64(), 2f64.powi(-120));
        assert_eq!(1.0 + 2f64.powi(-120) - 1.0, 0.0);
    }

    #[test]
    fn horizon_precision_scales_with_steps() {
        assert_eq!(
            Precision::for_horizon(1000, 0.5, 0),
            Precision::Extended { bits: 1128 }
        );
        assert_eq!(
            Precision::for_horizon(0, 0.5, 0),
            Precision::Extended {
                bits: MIN_WIDE_BITS
            }
        );
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1.0, 1e-17, 1e-17, -1.0].into_iter().collect();
        assert!((s.value() - 2e-17).abs() < 1e-30);
    }
}
