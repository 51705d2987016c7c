//! The threshold-deposit savings process.
//!
//! Each month the balance shrinks by the factor `1 + r` (with `-1 < r < 0`)
//! and a deposit is added: `v1` while the previous balance is below the
//! threshold `rho`, `v2` once it has reached it. The resulting map
//!
//! ```text
//! f(x) = (1 + r) x + v1   if x <  rho
//! f(x) = (1 + r) x + v2   if x >= rho
//! ```
//!
//! is a piecewise-affine contraction with one jump at `rho`. This module also
//! builds the explicit chaotic parameter family (deposits 1000 and 500,
//! `r = 1/b - 1`, threshold derived from the Fibonacci word) together with
//! the affine change of coordinates onto the normalized map of `[0, 1]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{Bits, Real, Wide, WideFloat};
use crate::words::fibonacci_digit;

/// Deposit below the threshold in the chaotic family.
pub const CHAOTIC_V1: f64 = 1000.0;
/// Deposit at or above the threshold in the chaotic family.
pub const CHAOTIC_V2: f64 = 500.0;
/// Largest number of Fibonacci-word terms `chaotic_params` will sum.
pub const MAX_TRUNCATION_ORDER: usize = 10_000;
/// Default target for the truncation error of the chaotic threshold.
pub const DEFAULT_PRECISION_TARGET: f64 = 1e-13;
/// Working precision used while deriving chaotic parameters for binary64
/// output.
const DERIVATION_BITS: usize = 192;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error("invalid process parameters: {0}")]
    InvalidParams(String),
    #[error("balance {0} is negative")]
    NegativeBalance(f64),
    #[error("point {0} is outside [0, 1]")]
    Domain(f64),
    #[error("interest rate is zero; the closed form divides by r")]
    SingularRate,
    #[error("interest rate {0} is outside (-1, 0)")]
    RateOutOfRange(f64),
    #[error("both deposits are zero; the process is degenerate")]
    DegenerateProcess,
    #[error("chaotic family requires b > 1, got {0}")]
    InvalidBase(f64),
    #[error("precision target {target:e} needs more than {cap} series terms")]
    PrecisionUnreachable { target: f64, cap: usize },
}

/// Interest rate, the two deposits and the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    pub r: f64,
    pub v1: f64,
    pub v2: f64,
    pub rho: f64,
}

impl ProcessParams {
    pub fn new(r: f64, v1: f64, v2: f64, rho: f64) -> Result<Self, ProcessError> {
        let p = ProcessParams { r, v1, v2, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ProcessError> {
        let bad = |msg: String| Err(ProcessError::InvalidParams(msg));
        if !(self.r > -1.0 && self.r < 0.0) {
            return bad(format!("r = {} must lie in (-1, 0)", self.r));
        }
        if !(self.v1 >= 0.0 && self.v1.is_finite()) {
            return bad(format!(
                "v1 = {} must be a finite non-negative amount",
                self.v1
            ));
        }
        if !(self.v2 >= 0.0 && self.v2.is_finite()) {
            return bad(format!(
                "v2 = {} must be a finite non-negative amount",
                self.v2
            ));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho = {} must be positive", self.rho));
        }
        Ok(())
    }

    /// The per-step factor `1 + r`.
    pub fn contraction(&self) -> f64 {
        1.0 + self.r
    }

    pub fn v_max(&self) -> f64 {
        self.v1.max(self.v2)
    }

    pub fn left_branch(&self, x: f64) -> f64 {
        self.contraction() * x + self.v1
    }

    pub fn right_branch(&self, x: f64) -> f64 {
        self.contraction() * x + self.v2
    }

    /// Unchecked map evaluation.
    pub fn apply(&self, x: f64) -> f64 {
        if x < self.rho {
            self.left_branch(x)
        } else {
            self.right_branch(x)
        }
    }

    pub fn step(&self, x: f64) -> Result<f64, ProcessError> {
        if x < 0.0 || x.is_nan() {
            return Err(ProcessError::NegativeBalance(x));
        }
        Ok(self.apply(x))
    }

    /// The map in the requested arithmetic. Converting to [`Wide`] is exact.
    pub fn process<T: Real>(&self, ctx: &T::Context) -> Process<T> {
        Process {
            slope: Slope::Multiply(T::from_f64(self.contraction(), ctx)),
            v1: T::from_f64(self.v1, ctx),
            v2: T::from_f64(self.v2, ctx),
            rho: T::from_f64(self.rho, ctx),
            ctx: ctx.clone(),
            summary: *self,
        }
    }
}

#[derive(Debug, Clone)]
enum Slope<T> {
    Multiply(T),
    Divide(T),
}

/// The savings map evaluated in arithmetic `T`.
///
/// Built either from [`ProcessParams`] or, for the chaotic family, from
/// [`ChaoticConfig::wide_process`], which derives the threshold directly at
/// the working precision instead of rounding it through binary64 first.
#[derive(Debug, Clone)]
pub struct Process<T: Real> {
    slope: Slope<T>,
    v1: T,
    v2: T,
    rho: T,
    ctx: T::Context,
    summary: ProcessParams,
}

impl<T: Real> Process<T> {
    fn scale(&self, x: &T) -> T {
        match &self.slope {
            Slope::Multiply(c) => x.mul(c),
            Slope::Divide(b) => x.div(b),
        }
    }

    pub fn step(&self, x: &T) -> T {
        let y = self.scale(x);
        if *x < self.rho {
            y.add(&self.v1)
        } else {
            y.add(&self.v2)
        }
    }

    /// `f(rho^-)`: the first branch evaluated at the threshold.
    pub fn left_limit_at_threshold(&self) -> T {
        self.scale(&self.rho).add(&self.v1)
    }

    /// `f(rho)`: the second branch evaluated at the threshold.
    pub fn image_of_threshold(&self) -> T {
        self.scale(&self.rho).add(&self.v2)
    }

    pub fn lift(&self, x: f64) -> T {
        T::from_f64(x, &self.ctx)
    }

    pub fn context(&self) -> &T::Context {
        &self.ctx
    }

    pub fn threshold(&self) -> &T {
        &self.rho
    }

    /// Binary64 view of the parameters.
    pub fn params(&self) -> &ProcessParams {
        &self.summary
    }

    pub fn orbit(&self, s0: T) -> Orbit<'_, T> {
        Orbit {
            process: self,
            next: s0,
        }
    }
}

/// Infinite iterator over `S_0, S_1, ...`.
pub struct Orbit<'a, T: Real> {
    process: &'a Process<T>,
    next: T,
}

impl<T: Real> Iterator for Orbit<'_, T> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        let following = self.process.step(&self.next);
        Some(std::mem::replace(&mut self.next, following))
    }
}

/// A simulated financial time series `S_0, ..., S_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub s0: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    /// Number of steps taken (one less than the number of values).
    pub fn steps(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Index of the first term that is not reproduced by applying the map
    /// to its predecessor in binary64.
    pub fn first_replay_mismatch(&self, p: &ProcessParams) -> Option<usize> {
        self.values
            .windows(2)
            .position(|w| p.apply(w[0]) != w[1])
            .map(|i| i + 1)
    }

    pub fn count_in(&self, lo: f64, hi: f64, first_n: usize) -> usize {
        self.values
            .iter()
            .take(first_n)
            .filter(|&&x| lo <= x && x <= hi)
            .count()
    }
}

pub fn step(p: &ProcessParams, x: f64) -> Result<f64, ProcessError> {
    p.step(x)
}

pub fn simulate(p: &ProcessParams, s0: f64, n: usize) -> Result<TimeSeries, ProcessError> {
    p.validate()?;
    if s0 < 0.0 || s0.is_nan() {
        return Err(ProcessError::NegativeBalance(s0));
    }
    let values = p.process::<f64>(&()).orbit(s0).take(n + 1).collect();
    Ok(TimeSeries { s0, values })
}

/// Simulation in arbitrary arithmetic; values are rounded to binary64 on
/// output only.
pub fn simulate_with<T: Real>(process: &Process<T>, s0: &T, n: usize) -> TimeSeries {
    let values = process
        .orbit(s0.clone())
        .take(n + 1)
        .map(|x| x.to_f64())
        .collect();
    TimeSeries {
        s0: s0.to_f64(),
        values,
    }
}

fn check_rate(r: f64) -> Result<(), ProcessError> {
    if r == 0.0 {
        return Err(ProcessError::SingularRate);
    }
    if !(r > -1.0 && r < 0.0) {
        return Err(ProcessError::RateOutOfRange(r));
    }
    Ok(())
}

/// `(1+r)^n S_0 + ((1+r)^n - 1) / r * v` for constant deposits.
pub fn closed_form(v: f64, r: f64, s0: f64, n: u64) -> Result<f64, ProcessError> {
    check_rate(r)?;
    if v < 0.0 {
        return Err(ProcessError::InvalidParams(format!(
            "deposit {v} is negative"
        )));
    }
    if s0 < 0.0 {
        return Err(ProcessError::NegativeBalance(s0));
    }
    let g = match i32::try_from(n) {
        Ok(k) => (1.0 + r).powi(k),
        Err(_) => (1.0 + r).powf(n as f64),
    };
    Ok(g * s0 + (g - 1.0) / r * v)
}

/// Long-run balance `-v / r` of the constant-deposit process.
pub fn limit_value(v: f64, r: f64) -> Result<f64, ProcessError> {
    check_rate(r)?;
    Ok(-v / r)
}

/// `M = -2 max(v1, v2) / r`; the map sends `[0, M]` into itself.
pub fn absorbing_bound(p: &ProcessParams) -> Result<f64, ProcessError> {
    let vmax = p.v_max();
    if vmax <= 0.0 {
        return Err(ProcessError::DegenerateProcess);
    }
    Ok(-2.0 * vmax / p.r)
}

/// Steps after which the orbit of `s0` is guaranteed to lie in `[0, M]`:
/// `(1+r)^k s0 <= M/2` suffices, plus one.
pub fn absorption_steps(p: &ProcessParams, s0: f64) -> u64 {
    let m = match absorbing_bound(p) {
        Ok(m) => m,
        Err(_) => return 0,
    };
    if s0 <= m / 2.0 {
        return 0;
    }
    let k = ((m / (2.0 * s0)).ln() / p.contraction().ln()).ceil();
    k.max(0.0) as u64 + 1
}

/// The normalized two-branch map of `[0, 1]` with slope `1/b`:
/// `x/b + delta` on `[0, x1)` and `x/b + delta - 1` on `[x1, 1]`,
/// where `x1 = b (1 - delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMap {
    pub b: f64,
    pub delta: f64,
    pub breakpoint: f64,
}

impl NormalizedMap {
    pub fn new(b: f64, delta: f64) -> Result<Self, ProcessError> {
        if !(b > 1.0 && b.is_finite()) {
            return Err(ProcessError::InvalidBase(b));
        }
        let breakpoint = b * (1.0 - delta);
        if !(breakpoint > 0.0 && breakpoint < 1.0) {
            return Err(ProcessError::InvalidParams(format!(
                "breakpoint b(1-delta) = {breakpoint} must lie in (0, 1)"
            )));
        }
        Ok(NormalizedMap {
            b,
            delta,
            breakpoint,
        })
    }

    pub fn apply(&self, x: f64) -> f64 {
        if x < self.breakpoint {
            x / self.b + self.delta
        } else {
            x / self.b + self.delta - 1.0
        }
    }
}

pub fn normalized_step(m: &NormalizedMap, x: f64) -> Result<f64, ProcessError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(ProcessError::Domain(x));
    }
    Ok(m.apply(x))
}

/// Parameters of the explicit chaotic process for a given `b > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaoticConfig {
    pub b: f64,
    pub delta: f64,
    pub rho: f64,
    /// Number of Fibonacci-word terms summed for `delta`.
    pub truncation_order: usize,
    /// Upper bound (rounded up) on the omitted tail of `delta`.
    pub truncation_bound: f64,
}

/// Series terms needed so that the tail of `delta` (at most `b^-(K+1)`)
/// times `scale` stays at or below `target`.
fn order_for_target(b: f64, target: f64, scale: f64) -> Option<usize> {
    // b^-(K+1) * scale <= target  <=>  K >= log(scale / target) / log b - 1
    let k = ((scale / target).ln() / b.ln() - 1.0).ceil().max(1.0);
    if !k.is_finite() || k > MAX_TRUNCATION_ORDER as f64 {
        return None;
    }
    let mut k = k as usize;
    // guard against log rounding in the ceil above
    while k <= MAX_TRUNCATION_ORDER && b.powi(-(k as i32 + 1)) * scale > target {
        k += 1;
    }
    (k <= MAX_TRUNCATION_ORDER).then_some(k)
}

/// Sensitivity of `rho` to `delta`: `|d rho / d delta| = 500 b^2 / (b - 1)`.
fn threshold_sensitivity(b: f64) -> f64 {
    CHAOTIC_V2 * b * b / (b - 1.0)
}

struct WideChaotic {
    delta: WideFloat,
    rho: WideFloat,
    tail: WideFloat,
}

/// `delta` and `rho` from the first `order` Fibonacci-word terms at `bits`
/// of precision.
fn derive_wide(b: f64, order: usize, bits: usize) -> WideChaotic {
    let w = |x: f64| Wide::new(x, bits).into_inner();
    let b_w = w(b);
    let one = w(1.0);
    let power_of_two = b.log2().fract() == 0.0;
    let inv_b = &one / &b_w;
    // Horner: S = sum_{k<K} omega_k b^-k
    let mut s = w(f64::from(fibonacci_digit(order as u64 - 1)));
    for k in (0..order - 1).rev() {
        let scaled = if power_of_two { &s * &inv_b } else { &s / &b_w };
        s = if fibonacci_digit(k as u64) == 1 {
            scaled + &one
        } else {
            scaled
        };
    }
    let one_minus_inv = &one - &inv_b;
    let delta = &one - &inv_b + &inv_b * &one_minus_inv * &s;
    let rho = w(CHAOTIC_V2) * &b_w / (&b_w - &one) * (&b_w * (&one - &delta) + &one);
    // tail <= (1/b)(1 - 1/b) * b^-K / (1 - 1/b) = b^-(K+1)
    let mut tail = inv_b.clone();
    for _ in 0..order {
        tail = &tail * &inv_b;
    }
    WideChaotic { delta, rho, tail }
}

fn round_up_to_f64(x: &WideFloat) -> f64 {
    let y = x.to_f64().value();
    match WideFloat::try_from(y) {
        Ok(back) if back < *x => y.next_up(),
        _ => y,
    }
}

/// Derives `delta`, `rho` and the truncation bookkeeping for base `b`.
///
/// `K` is the smallest order whose tail bound, propagated to `rho`, is at
/// most `precision_target` (which also bounds the tail of `delta` itself).
pub fn chaotic_params(b: f64, precision_target: f64) -> Result<ChaoticConfig, ProcessError> {
    if !(b > 1.0 && b.is_finite()) {
        return Err(ProcessError::InvalidBase(b));
    }
    if !(precision_target > 0.0) {
        return Err(ProcessError::InvalidParams(format!(
            "precision target {precision_target} must be positive"
        )));
    }
    let scale = threshold_sensitivity(b).max(1.0);
    let order =
        order_for_target(b, precision_target, scale).ok_or(ProcessError::PrecisionUnreachable {
            target: precision_target,
            cap: MAX_TRUNCATION_ORDER,
        })?;
    let wide = derive_wide(b, order, DERIVATION_BITS);
    Ok(ChaoticConfig {
        b,
        delta: wide.delta.to_f64().value(),
        rho: wide.rho.to_f64().value(),
        truncation_order: order,
        truncation_bound: round_up_to_f64(&wide.tail),
    })
}

impl ChaoticConfig {
    pub fn r(&self) -> f64 {
        1.0 / self.b - 1.0
    }

    pub fn params(&self) -> ProcessParams {
        ProcessParams {
            r: self.r(),
            v1: CHAOTIC_V1,
            v2: CHAOTIC_V2,
            rho: self.rho,
        }
    }

    pub fn normalized_map(&self) -> NormalizedMap {
        NormalizedMap {
            b: self.b,
            delta: self.delta,
            breakpoint: self.b * (1.0 - self.delta),
        }
    }

    fn scale(&self) -> f64 {
        CHAOTIC_V2 * self.b / (self.b - 1.0)
    }

    /// The interval `K` carrying the attractor:
    /// `[500b/(b-1) (2 - delta), 500b/(b-1) (3 - delta - 1/b)]`.
    pub fn invariant_interval(&self) -> (f64, f64) {
        let s = self.scale();
        (
            s * (2.0 - self.delta),
            s * (3.0 - self.delta - 1.0 / self.b),
        )
    }

    /// Separation constant `500 b (1 - 1/b)` of the sensitivity argument.
    pub fn eta(&self) -> f64 {
        CHAOTIC_V2 * self.b * (1.0 - 1.0 / self.b)
    }

    /// The open interval `K \ f(K) = (f(max K), f(min K))`, of length
    /// `500 (1 - 1/b)`, which no orbit in `K` ever enters.
    pub fn excluded_gap(&self) -> (f64, f64) {
        let (lo, hi) = self.invariant_interval();
        (hi / self.b + CHAOTIC_V2, lo / self.b + CHAOTIC_V1)
    }

    /// Affine change of coordinates `x/500 + b(delta - 2)/(b - 1)` sending
    /// `K` onto `[0, 1]`.
    pub fn conjugacy(&self, x: f64) -> f64 {
        x / CHAOTIC_V2 + self.b * (self.delta - 2.0) / (self.b - 1.0)
    }

    pub fn conjugacy_inverse(&self, u: f64) -> f64 {
        (u - self.b * (self.delta - 2.0) / (self.b - 1.0)) * CHAOTIC_V2
    }

    /// The chaotic map at `bits` of precision, with `delta` and `rho`
    /// re-derived at that precision.
    pub fn wide_process(&self, bits: usize) -> Process<Wide> {
        // tail b^-(K+1) * 500b^2/(b-1) below 2^-bits relative to rho
        let target_log2 = bits as f64 + threshold_sensitivity(self.b).log2() + 16.0;
        let order = (target_log2 / self.b.log2()).ceil().max(1.0) as usize;
        let wide = derive_wide(self.b, order, bits);
        let ctx = Bits(bits);
        let slope = if self.b.log2().fract() == 0.0 {
            Slope::Multiply(Wide::from_f64(1.0 / self.b, &ctx))
        } else {
            Slope::Divide(Wide::from_f64(self.b, &ctx))
        };
        Process {
            slope,
            v1: Wide::from_f64(CHAOTIC_V1, &ctx),
            v2: Wide::from_f64(CHAOTIC_V2, &ctx),
            rho: Wide(wide.rho),
            ctx,
            summary: self.params(),
        }
    }

    /// Binary64 process with the threshold rounded once.
    pub fn double_process(&self) -> Process<f64> {
        self.params().process(&())
    }
}

/// Free-function form of [`ChaoticConfig::conjugacy`].
pub fn conjugacy(c: &ChaoticConfig, x: f64) -> f64 {
    c.conjugacy(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(r: f64, v1: f64, v2: f64, rho: f64) -> ProcessParams {
        ProcessParams::new(r, v1, v2, rho).unwrap()
    }

    #[test]
    fn step_branches_and_tie() {
        let p = pp(-0.5, 1000.0, 500.0, 1500.0);
        assert_eq!(step(&p, 1000.0).unwrap(), 1500.0);
        assert_eq!(step(&p, 1500.0).unwrap(), 1250.0);
        assert_eq!(step(&p, -1.0), Err(ProcessError::NegativeBalance(-1.0)));
    }

    #[test]
    fn constant_deposit_fixed_point() {
        let p = pp(-0.5, 500.0, 500.0, 123.0);
        assert_eq!(step(&p, 1000.0).unwrap(), 1000.0);
    }

    #[test]
    fn params_validation() {
        assert!(ProcessParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ProcessParams::new(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ProcessParams::new(-0.5, -1.0, 1.0, 1.0).is_err());
        assert!(ProcessParams::new(-0.5, 1.0, 1.0, 0.0).is_err());
        assert!(ProcessParams::new(-0.5, 0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn closed_form_cases() {
        assert_eq!(closed_form(500.0, -0.5, 42.0, 0).unwrap(), 42.0);
        // 0 -> 500 -> 750 -> 875
        assert_eq!(closed_form(500.0, -0.5, 0.0, 3).unwrap(), 875.0);
        for n in [0, 1, 7, 100] {
            assert!((closed_form(500.0, -0.5, 1000.0, n).unwrap() - 1000.0).abs() < 1e-12);
        }
        assert_eq!(
            closed_form(1.0, 0.0, 1.0, 1),
            Err(ProcessError::SingularRate)
        );
        assert!(matches!(
            closed_form(1.0, 0.5, 1.0, 1),
            Err(ProcessError::RateOutOfRange(_))
        ));
    }

    #[test]
    fn limit_values() {
        assert_eq!(limit_value(500.0, -0.5).unwrap(), 1000.0);
        assert_eq!(limit_value(0.0, -0.5).unwrap(), 0.0);
        assert_eq!(limit_value(1000.0, -0.5).unwrap(), 2000.0);
        assert_eq!(limit_value(1.0, 0.0), Err(ProcessError::SingularRate));
    }

    #[test]
    fn absorbing_bound_cases() {
        let p = pp(-0.5, 1000.0, 500.0, 1500.0);
        assert_eq!(absorbing_bound(&p).unwrap(), 4000.0);
        // both branches at the upper end stay inside
        assert_eq!(p.left_branch(4000.0), 3000.0);
        assert_eq!(p.right_branch(4000.0), 2500.0);
        assert_eq!(absorbing_bound(&pp(-0.25, 0.0, 100.0, 1.0)).unwrap(), 800.0);
        assert_eq!(
            absorbing_bound(&pp(-0.25, 0.0, 0.0, 1.0)),
            Err(ProcessError::DegenerateProcess)
        );
    }

    #[test]
    fn normalized_map_breakpoint_behaviour() {
        let c = chaotic_params(2.0, 1e-13).unwrap();
        let m = c.normalized_map();
        assert!(normalized_step(&m, m.breakpoint).unwrap().abs() < 1e-15);
        let below = normalized_step(&m, m.breakpoint.next_down()).unwrap();
        assert!((below - 1.0).abs() < 1e-15);
        assert_eq!(normalized_step(&m, 0.0).unwrap(), m.delta);
        assert!(matches!(
            normalized_step(&m, 1.1),
            Err(ProcessError::Domain(_))
        ));
    }

    #[test]
    fn chaotic_errors() {
        assert_eq!(
            chaotic_params(1.0, 1e-13),
            Err(ProcessError::InvalidBase(1.0))
        );
        assert_eq!(
            chaotic_params(0.5, 1e-13),
            Err(ProcessError::InvalidBase(0.5))
        );
        assert!(matches!(
            chaotic_params(1.0001, 1e-13),
            Err(ProcessError::PrecisionUnreachable { .. })
        ));
        assert!(chaotic_params(2.0, 0.0).is_err());
    }

    #[test]
    fn chaotic_delta_exceeds_zero_word_value() {
        for b in [1.5, 2.0, 3.0, 10.0] {
            let c = chaotic_params(b, 1e-12).unwrap();
            assert!(c.delta > 1.0 - 1.0 / b);
            assert!(c.delta < 1.0);
        }
    }

    #[test]
    fn tail_bound_is_geometric() {
        let c = chaotic_params(2.0, 1e-13).unwrap();
        let k = c.truncation_order as i32;
        assert_eq!(c.truncation_bound, 2f64.powi(-(k + 1)));
        assert!(c.truncation_bound * threshold_sensitivity(2.0) <= 1e-13);
    }

    #[test]
    fn conjugacy_maps_interval_to_unit() {
        let c = chaotic_params(2.0, 1e-13).unwrap();
        let (lo, hi) = c.invariant_interval();
        assert!(c.conjugacy(lo).abs() < 1e-12);
        assert!((c.conjugacy(hi) - 1.0).abs() < 1e-12);
        assert!((hi - lo - 500.0).abs() < 1e-9);
        assert!((c.conjugacy(c.rho) - c.normalized_map().breakpoint).abs() < 1e-12);
        assert_eq!(c.eta(), 500.0);
    }

    #[test]
    fn excluded_gap_is_image_complement() {
        let c = chaotic_params(2.0, 1e-13).unwrap();
        let p = c.params();
        let (lo, hi) = c.invariant_interval();
        let (g_lo, g_hi) = c.excluded_gap();
        assert!((g_hi - g_lo - 250.0).abs() < 1e-9);
        assert_eq!(g_lo, p.right_branch(hi));
        assert_eq!(g_hi, p.left_branch(lo));
        assert!(lo < g_lo && g_hi < hi);
    }

    #[test]
    fn wide_process_agrees_with_double() {
        let c = chaotic_params(2.0, 1e-13).unwrap();
        let w = c.wide_process(256);
        assert_eq!(w.threshold().to_f64(), c.rho);
        let c3 = chaotic_params(3.0, 1e-13).unwrap();
        let w3 = c3.wide_process(256);
        assert_eq!(w3.threshold().to_f64(), c3.rho);
        let x = w3.lift(1000.0);
        assert!((w3.step(&x).to_f64() - c3.params().apply(1000.0)).abs() < 1e-12);
    }

    #[test]
    fn absorption_step_estimate() {
        let p = pp(-0.5, 1000.0, 500.0, 1500.0);
        assert_eq!(absorption_steps(&p, 100.0), 0);
        let k = absorption_steps(&p, 40_000.0);
        let mut x = 40_000.0;
        for _ in 0..k {
            x = p.apply(x);
        }
        assert!(x <= 4000.0);
    }
}
