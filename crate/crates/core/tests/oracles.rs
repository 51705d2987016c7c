//! Reference values computed independently of the library: exact rational
//! arithmetic for the process and the chaotic threshold, and the
//! concatenation rule for the Fibonacci word.

use num_bigint::BigInt;
use num_rational::BigRational;
use savings_chaos::analysis::{detect_cycle, CycleOptions};
use savings_chaos::process::{chaotic_params, closed_form, simulate, ProcessParams};
use savings_chaos::semiconjugacy::{breakpoint_from_gaps, GapSystem};
use savings_chaos::words::fibonacci_word;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(x: &BigRational) -> f64 {
    // numerator and denominator stay far below f64 range here; scale to
    // keep 64+ significant bits before the final division
    let scale: BigInt = BigInt::from(1u8) << 200usize;
    let scaled = (x * BigRational::from_integer(scale)).round().to_integer();
    scaled.to_string().parse::<f64>().unwrap() / 2f64.powi(200)
}

/// `S_{n+1} = f(S_n)` in exact arithmetic.
fn exact_step(
    x: &BigRational,
    r: &BigRational,
    v1: &BigRational,
    v2: &BigRational,
    rho: &BigRational,
) -> BigRational {
    let v = if x < rho { v1 } else { v2 };
    (BigRational::from_integer(1.into()) + r) * x + v
}

#[test]
fn two_cycle_matches_exact_rational_solution() {
    // the cycle a < rho <= b with b = f(a), a = f(b), solved exactly
    let (r, v1, v2, rho) = (q(-1, 2), q(1000, 1), q(500, 1), q(1500, 1));
    // a = (1+r)((1+r)a + v1) + v2  =>  a (1 - (1+r)^2) = (1+r) v1 + v2
    let one = q(1, 1);
    let g = &one + &r;
    let a = (&g * &v1 + &v2) / (&one - &g * &g);
    let b = exact_step(&a, &r, &v1, &v2, &rho);
    assert_eq!(a, q(4000, 3));
    assert_eq!(b, q(5000, 3));
    assert_eq!(exact_step(&b, &r, &v1, &v2, &rho), a);

    let p = ProcessParams::new(-0.5, 1000.0, 500.0, 1500.0).unwrap();
    let report = detect_cycle(&p.process::<f64>(&()), &0.0, &CycleOptions::default());
    assert_eq!(report.period, 2);
    let mut pts = report.cycle_points.clone();
    pts.sort_by(f64::total_cmp);
    assert!((pts[0] - to_f64(&a)).abs() <= 1e-9);
    assert!((pts[1] - to_f64(&b)).abs() <= 1e-9);
}

#[test]
fn exact_orbit_tracks_binary64_orbit() {
    let (r, v1, v2, rho) = (q(-1, 2), q(1000, 1), q(500, 1), q(1500, 1));
    let p = ProcessParams::new(-0.5, 1000.0, 500.0, 1500.0).unwrap();
    let ts = simulate(&p, 123.0, 60).unwrap();
    let mut x = q(123, 1);
    for &y in &ts.values {
        assert!((to_f64(&x) - y).abs() <= 1e-12 * y.max(1.0));
        x = exact_step(&x, &r, &v1, &v2, &rho);
    }
}

#[test]
fn closed_form_single_step() {
    // (1/2) * 750 + 500
    assert_eq!(closed_form(500.0, -0.5, 750.0, 1).unwrap(), 875.0);
    let p = ProcessParams::new(-0.5, 500.0, 500.0, 700.0).unwrap();
    assert_eq!(simulate(&p, 750.0, 1).unwrap().values[1], 875.0);
}

fn fibonacci_by_concatenation(len: usize) -> String {
    let (mut a, mut b) = (String::from("0"), String::from("01"));
    while b.len() < len {
        let next = format!("{b}{a}");
        a = b;
        b = next;
    }
    b[..len].to_string()
}

#[test]
fn fibonacci_word_matches_concatenation_rule() {
    for len in [1, 2, 5, 51, 1000, 10_946] {
        assert_eq!(
            fibonacci_word(len).unwrap().to_string(),
            fibonacci_by_concatenation(len)
        );
    }
}

/// `delta = 1 - 1/b + (1/b)(1 - 1/b) sum_{k<K} omega_k b^-k` for `b = 2`,
/// exactly, with `omega` from the concatenation rule.
fn exact_delta_b2(terms: usize) -> BigRational {
    let word = fibonacci_by_concatenation(terms);
    let half = q(1, 2);
    let mut sum = q(0, 1);
    let mut power = q(1, 1);
    for c in word.chars() {
        if c == '1' {
            sum += &power;
        }
        power *= &half;
    }
    &q(1, 1) - &half + &half * &half * sum
}

#[test]
fn chaotic_threshold_and_interval_match_exact_series() {
    // 200 terms leave a tail below 2^-200
    let delta = exact_delta_b2(200);
    let c = chaotic_params(2.0, 1e-13).unwrap();
    let scale = q(1000, 1); // 500 b / (b - 1)
    let rho = &scale * (q(2, 1) * (q(1, 1) - &delta) + q(1, 1));
    let k_lo = &scale * (q(2, 1) - &delta);
    let k_hi = &scale * (q(5, 2) - &delta);

    assert!((c.delta - to_f64(&delta)).abs() <= 1e-15);
    assert!((c.rho - to_f64(&rho)).abs() <= 1e-12);
    assert_eq!(to_f64(&rho), 1709.8034428612914);
    let (lo, hi) = c.invariant_interval();
    assert!((lo - to_f64(&k_lo)).abs() <= 1e-12);
    assert!((hi - to_f64(&k_hi)).abs() <= 1e-12);
    assert!((lo - 1354.9017214306457).abs() <= 1e-12);
    assert!((hi - 1854.9017214306457).abs() <= 1e-12);
}

#[test]
fn gap_breakpoint_matches_exact_breakpoint() {
    let delta = exact_delta_b2(200);
    let x1 = to_f64(&(q(2, 1) * (q(1, 1) - delta)));
    for order in [20, 40, 60] {
        let gs = GapSystem::golden(2.0, order).unwrap();
        let err = (breakpoint_from_gaps(&gs) - x1).abs();
        assert!(
            err <= 2.0 * 2f64.powi(-(order as i32)) + 1e-15,
            "order {order}: {err:e}"
        );
    }
}
