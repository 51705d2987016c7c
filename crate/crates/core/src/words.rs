//! Fibonacci word and codings of circle rotations.
//!
//! Digits of the Fibonacci word are computed from floors of multiples of
//! the golden ratio using integer square roots, so every digit is exact
//! regardless of index. Rotation orbits are evaluated as `frac(x0 + k*alpha)`
//! rather than by repeated addition.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("requested an empty word")]
    EmptyRequest,
    #[error("rotation angle {0} is not in (0, 1)")]
    InvalidAngle(f64),
    #[error("point {0} is outside [0, 1]")]
    Domain(f64),
}

/// Finite word over the alphabet {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryWord(Vec<u8>);

impl BinaryWord {
    pub fn new(digits: Vec<u8>) -> Option<Self> {
        digits.iter().all(|&d| d <= 1).then_some(BinaryWord(digits))
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &BinaryWord) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Length of the longest run of `symbol`.
    pub fn longest_run(&self, symbol: u8) -> usize {
        let mut best = 0;
        let mut cur = 0;
        for &d in &self.0 {
            if d == symbol {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        best
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// `floor(n * phi)` with `phi = (1 + sqrt 5) / 2`, exact for every `n`.
///
/// `n*phi = (n + sqrt(5 n^2)) / 2` and `sqrt(5 n^2)` is irrational for
/// `n >= 1`, so the floor is `(n + isqrt(5 n^2)) / 2` in integer division.
pub fn floor_golden_multiple(n: u64) -> u64 {
    let n = u128::from(n);
    ((n + (5 * n * n).isqrt()) / 2) as u64
}

/// Digit `i` of the Fibonacci word: `2 + floor((i+1) phi) - floor((i+2) phi)`.
pub fn fibonacci_digit(i: u64) -> u8 {
    (2 + floor_golden_multiple(i + 1) - floor_golden_multiple(i + 2)) as u8
}

pub fn fibonacci_word(n: usize) -> Result<BinaryWord, WordError> {
    if n == 0 {
        return Err(WordError::EmptyRequest);
    }
    Ok(BinaryWord((0..n as u64).map(fibonacci_digit).collect()))
}

/// Angle of a rotation of the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    alpha: f64,
}

impl RotationParams {
    pub fn new(alpha: f64) -> Result<Self, WordError> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(RotationParams { alpha })
        } else {
            Err(WordError::InvalidAngle(alpha))
        }
    }

    /// `alpha = (3 - sqrt 5) / 2 = 2 - phi`.
    pub fn golden() -> Self {
        RotationParams {
            alpha: (3.0 - 5f64.sqrt()) / 2.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Left endpoint of the second branch, `1 - alpha`.
    pub fn cut(&self) -> f64 {
        1.0 - self.alpha
    }

    /// `T^k(x0)` evaluated as a fractional part.
    pub fn orbit_point(&self, x0: f64, k: u64) -> f64 {
        if k == 0 {
            return x0;
        }
        (x0 + k as f64 * self.alpha).rem_euclid(1.0)
    }

    /// Unchecked single step of the rotation.
    pub fn apply(&self, x: f64) -> f64 {
        if x < self.cut() {
            x + self.alpha
        } else {
            x + self.alpha - 1.0
        }
    }
}

pub fn rotation_step(x: f64, rp: &RotationParams) -> Result<f64, WordError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(WordError::Domain(x));
    }
    Ok(rp.apply(x))
}

/// Itinerary of `x0` under the rotation: symbol `1` while the point is in
/// `[0, 1 - alpha)`, symbol `2` on `[1 - alpha, 1]`.
pub fn rotation_coding(rp: &RotationParams, x0: f64, n: usize) -> Result<Vec<u8>, WordError> {
    if n == 0 {
        return Err(WordError::EmptyRequest);
    }
    if !(0.0..=1.0).contains(&x0) {
        return Err(WordError::Domain(x0));
    }
    let cut = rp.cut();
    Ok((0..n as u64)
        .map(|k| if rp.orbit_point(x0, k) < cut { 1 } else { 2 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRINTED: &str = "010010100100101001010010010100100101001010010010100";

    #[test]
    fn first_digits() {
        assert_eq!(fibonacci_word(1).unwrap().digits(), &[0]);
        assert_eq!(fibonacci_word(3).unwrap().digits(), &[0, 1, 0]);
        assert_eq!(fibonacci_word(51).unwrap().to_string(), PRINTED);
    }

    #[test]
    fn empty_word_is_rejected() {
        assert_eq!(fibonacci_word(0), Err(WordError::EmptyRequest));
    }

    #[test]
    fn golden_floor_matches_float_for_small_n() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for n in 0..10_000u64 {
            assert_eq!(floor_golden_multiple(n), (n as f64 * phi).floor() as u64);
        }
    }

    #[test]
    fn golden_floor_brackets_exactly() {
        // floor(n phi) = m  <=>  m <= n phi < m + 1, checked in integers:
        // 2m - n <= sqrt(5) n  <=>  (2m - n)^2 <= 5 n^2 when 2m >= n.
        for n in [1u64, 89, 144, 1_000_000, 123_456_789, 4_000_000_000] {
            let m = floor_golden_multiple(n) as i128;
            let n = n as i128;
            let lo = 2 * m - n;
            let hi = 2 * (m + 1) - n;
            assert!(lo * lo < 5 * n * n, "lower bracket fails at n={n}");
            assert!(hi * hi > 5 * n * n, "upper bracket fails at n={n}");
        }
    }

    #[test]
    fn word_constraints_hold() {
        let w = fibonacci_word(100_000).unwrap();
        assert_eq!(w.longest_run(1), 1);
        assert_eq!(w.longest_run(0), 2);
    }

    #[test]
    fn rotation_branches() {
        let rp = RotationParams::golden();
        let a = rp.alpha();
        assert_eq!(rotation_step(0.0, &rp).unwrap(), a);
        assert_eq!(rotation_step(1.0 - a, &rp).unwrap(), 0.0);
        let three = (0..3).fold(0.0, |x, _| rotation_step(x, &rp).unwrap());
        assert!((three - (3.0 * a - 1.0)).abs() < 1e-15);
        assert!(matches!(rotation_step(1.5, &rp), Err(WordError::Domain(_))));
        assert!(matches!(
            rotation_step(-0.1, &rp),
            Err(WordError::Domain(_))
        ));
    }

    #[test]
    fn rotation_angle_validated() {
        assert!(RotationParams::new(0.0).is_err());
        assert!(RotationParams::new(1.0).is_err());
        assert!(RotationParams::new(f64::NAN).is_err());
        assert!(RotationParams::new(0.3).is_ok());
    }

    #[test]
    fn coding_edges() {
        let rp = RotationParams::golden();
        assert_eq!(rotation_coding(&rp, 0.0, 1).unwrap(), vec![1]);
        assert_eq!(rotation_coding(&rp, rp.cut(), 1).unwrap(), vec![2]);
        assert_eq!(rotation_coding(&rp, 0.2, 0), Err(WordError::EmptyRequest));
    }

    #[test]
    fn coding_of_alpha_is_fibonacci() {
        let rp = RotationParams::golden();
        let coding = rotation_coding(&rp, rp.alpha(), 51).unwrap();
        let shifted: Vec<u8> = coding.iter().map(|s| s - 1).collect();
        assert_eq!(shifted, fibonacci_word(51).unwrap().digits());
    }
}
