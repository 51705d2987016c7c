//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! and then asserts, so `cargo test --test acceptance -- --nocapture`
//! gives a one-line-per-criterion summary.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use savings_chaos::analysis::{
    detect_cycle, omega_limit_approx, sensitivity_probe, visit_frequency, ClassifyBudget,
    CycleOptions, Verdict,
};
use savings_chaos::numeric::{Precision, Real, Wide};
use savings_chaos::process::{
    absorbing_bound, chaotic_params, closed_form, simulate, ChaoticConfig, ProcessParams,
};
use savings_chaos::semiconjugacy::{
    breakpoint_from_gaps, predict_frequency, semiconjugacy_residual, GapSystem, ResidualCheck,
};
use savings_chaos::{classify_dichotomy, fibonacci_word};

/// Timed criteria run one at a time so they do not compete for cores.
static SERIAL: Mutex<()> = Mutex::new(());

const PAPER_RHO: f64 = 1709.8034428612914;
const TABLE_SEEDS: [f64; 5] = [1450.0, 1380.0, 1023.0, 1900.0, 800.0];

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} [{verdict}] {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn chaotic_b2() -> ChaoticConfig {
    chaotic_params(2.0, 1e-13).unwrap()
}

fn bits_for(steps: usize) -> usize {
    Precision::for_horizon(steps as u64, 0.5, 0).bits()
}

#[test]
fn criterion_01_fibonacci_word() {
    let _g = lock();
    let expected = "010010100100101001010010010100100101001010010010100";
    // warm the allocator so the measurement reflects the computation
    let _ = fibonacci_word(51);
    let (w, t) = timed(|| fibonacci_word(51).unwrap());
    let ok = w.to_string() == expected && t < Duration::from_millis(1);
    report(1, "Fibonacci word", ok, format!("{w} in {t:?}"));
}

#[test]
fn criterion_02_chaotic_threshold() {
    let _g = lock();
    let (c, t) = timed(|| chaotic_b2());
    let err = (c.rho - PAPER_RHO).abs();
    let ok = err <= 1e-12 && t < Duration::from_millis(10);
    report(
        2,
        "chaotic threshold",
        ok,
        format!(
            "rho = {:.17} (|error| {err:.1e}, K = {}) in {t:?}",
            c.rho, c.truncation_order
        ),
    );
}

#[test]
fn criterion_03_frequency_table() {
    let _g = lock();
    let c = chaotic_b2();
    let expected = [92usize, 92, 92, 93, 92];
    let (counts, t) = timed(|| {
        let p = c.double_process();
        TABLE_SEEDS
            .iter()
            .map(|s0| visit_frequency(&p, s0, (1400.0, 1600.0), 150).count)
            .collect::<Vec<_>>()
    });
    let within = counts
        .iter()
        .zip(expected)
        .all(|(&got, want)| got.abs_diff(want) <= 1);
    let ok = within && t < Duration::from_secs(1);
    report(
        3,
        "frequency table N=150",
        ok,
        format!("counts {counts:?}, expected {expected:?} +-1, in {t:?}"),
    );
}

#[test]
fn criterion_04_closed_form() {
    let p = ProcessParams::new(-0.5, 500.0, 500.0, 700.0).unwrap();
    let mut runner = TestRunner::new(Config {
        cases: 20,
        failure_persistence: None,
        ..Config::default()
    });
    let worst = std::cell::Cell::new(0.0f64);
    let result = runner.run(&(0.0f64..=4000.0), |s0| {
        let ts = simulate(&p, s0, 1000).unwrap();
        for (n, &x) in ts.values.iter().enumerate() {
            let exact = closed_form(500.0, -0.5, s0, n as u64).unwrap();
            let rel = (x - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
            worst.set(worst.get().max(rel));
            prop_assert!(rel <= 1e-9, "s0 = {s0}, n = {n}: {x} vs {exact}");
        }
        Ok(())
    });
    report(
        4,
        "closed-form equivalence",
        result.is_ok(),
        format!(
            "20 seeds, n <= 1000, worst relative error {:.1e}",
            worst.get()
        ),
    );
}

#[test]
fn criterion_05_periodic_side() {
    let p = ProcessParams::new(-0.5, 1000.0, 500.0, 1500.0).unwrap();
    let v = classify_dichotomy(&p.process::<f64>(&()), &ClassifyBudget::default());
    let (ok, detail) = match &v {
        Verdict::Periodic { cycles } if cycles.len() == 1 && cycles[0].period == 2 => {
            let mut pts = cycles[0].cycle_points.clone();
            pts.sort_by(f64::total_cmp);
            let err = (pts[0] - 4000.0 / 3.0)
                .abs()
                .max((pts[1] - 5000.0 / 3.0).abs());
            (err <= 1e-6, format!("2-cycle {pts:?}, max error {err:.1e}"))
        }
        other => (false, format!("unexpected verdict {other:?}")),
    };
    report(5, "dichotomy, periodic side", ok, detail);
}

#[test]
fn criterion_06_cantor_side() {
    let _g = lock();
    let c = chaotic_b2();
    let max_iter = 100_000;
    let process = c.wide_process(bits_for(max_iter));
    let opts = CycleOptions {
        max_iter,
        tol: 1e-9,
        ..CycleOptions::default()
    };
    let seeds = [process.image_of_threshold(), process.lift(1450.0)];
    let cycles: Vec<_> = seeds
        .iter()
        .map(|s| detect_cycle(&process, s, &opts))
        .collect();
    let no_cycle = cycles.iter().all(|r| !r.found());

    let (burn_in, samples) = (2_000, 20_000);
    let omega_process = c.wide_process(bits_for(burn_in + samples));
    let s0 = omega_process.lift(1450.0);
    let resolutions = [10.0, 5.0, 2.5, 1.25];
    let omegas: Vec<_> = resolutions
        .iter()
        .map(|&r| omega_limit_approx(&omega_process, &s0, burn_in, samples, r))
        .collect();
    let counts: Vec<usize> = omegas.iter().map(|o| o.points.len()).collect();
    let increasing = counts.windows(2).all(|w| w[1] > w[0]);
    let (k_lo, k_hi) = c.invariant_interval();
    let inside = omegas
        .iter()
        .flat_map(|o| &o.extents)
        .all(|&(lo, hi)| lo >= k_lo && hi <= k_hi);
    let statuses: Vec<_> = cycles.iter().map(|r| r.status).collect();
    report(
        6,
        "dichotomy, Cantor side",
        no_cycle && increasing && inside,
        format!(
            "cycle search {statuses:?}; clusters {counts:?} at {resolutions:?}; \
             inside K=[{k_lo:.10}, {k_hi:.10}]: {inside}"
        ),
    );
}

#[test]
fn criterion_07_sensitivity() {
    let _g = lock();
    let c = chaotic_b2();
    let process = c.wide_process(bits_for(22_000));
    let omega = omega_limit_approx(&process, &process.lift(1450.0), 2_000, 20_000, 0.5);
    assert!(omega.points.len() >= 10, "need 10 cluster seeds");
    let stride = omega.points.len() / 10;
    let seeds: Vec<f64> = (0..10).map(|i| omega.points[i * stride]).collect();

    let mut worst = Duration::ZERO;
    let mut failures = Vec::new();
    let mut ks = Vec::new();
    for &s0 in &seeds {
        let (rep, t) = timed(|| sensitivity_probe(&c, s0, 1e-6, 200));
        worst = worst.max(t);
        ks.push(rep.witness_k);
        let valid = rep.found
            && rep.achieved_separation >= 500.0
            && (rep.witness_s0prime - s0).abs() <= 1e-6;
        if !valid || t >= Duration::from_secs(1) {
            failures.push((s0, rep.achieved_separation, t));
        }
    }
    report(
        7,
        "sensitivity",
        failures.is_empty() && c.eta() == 500.0,
        format!(
            "eta = {}, witness steps {ks:?}, slowest probe {worst:?}, failures {failures:?}",
            c.eta()
        ),
    );
}

#[test]
fn criterion_08_semiconjugacy() {
    let c = chaotic_b2();
    let m = c.normalized_map();
    let gs = GapSystem::golden(2.0, 60).unwrap();
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for i in 0..1000 {
        let x = (i as f64 + 0.5) / 1000.0;
        match semiconjugacy_residual(&gs, &m, x).unwrap() {
            ResidualCheck::Measured(r) => worst = worst.max(r),
            ResidualCheck::Inconclusive => skipped += 1,
        }
    }
    let bound = 2.0 * 2f64.powi(-60) + 1e-9;
    let gs20 = GapSystem::golden(2.0, 20).unwrap();
    let x1 = m.breakpoint;
    let bp_err = (breakpoint_from_gaps(&gs20) - x1).abs();
    let ok = worst <= bound && bp_err <= 2.0 * 2f64.powi(-20);
    report(
        8,
        "semiconjugacy",
        ok,
        format!(
            "max residual {worst:.2e} (bound {bound:.2e}, {skipped} samples in the exclusion band); \
             breakpoint error at K=20 {bp_err:.2e}"
        ),
    );
}

#[test]
fn criterion_09_unique_ergodicity() {
    let _g = lock();
    let c = chaotic_b2();
    let n = 100_000;
    let j = (1400.0, 1600.0);
    let (freqs, t) = timed(|| {
        let process = c.wide_process(bits_for(n));
        TABLE_SEEDS
            .iter()
            .map(|&s0| visit_frequency(&process, &Wide::new(s0, 53), j, n).freq)
            .collect::<Vec<_>>()
    });
    let spread = freqs.iter().cloned().fold(f64::MIN, f64::max)
        - freqs.iter().cloned().fold(f64::MAX, f64::min);
    let gs = GapSystem::golden(2.0, 60).unwrap();
    let pred = predict_frequency(&gs, &c, j);
    let tol = pred.truncation_error + 1e-3;
    let worst = freqs
        .iter()
        .map(|f| (f - pred.predicted).abs())
        .fold(0.0, f64::max);
    let ok = spread <= 2e-3 && worst <= tol && t < Duration::from_secs(10);
    report(
        9,
        "unique ergodicity",
        ok,
        format!(
            "freqs {freqs:?}, spread {spread:.1e}, predicted {:.10} (max deviation {worst:.1e}, \
             tolerance {tol:.1e}), in {t:?}",
            pred.predicted
        ),
    );
}

#[test]
fn criterion_10_absorption() {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let params = (
        -0.999f64..-0.001,
        0.0f64..5000.0,
        0.0f64..5000.0,
        1e-3f64..20_000.0,
    )
        .prop_filter("degenerate", |(_, v1, v2, _)| v1.max(*v2) > 0.0);
    let result = runner.run(&(params, 0.0f64..=1.0), |((r, v1, v2, rho), u)| {
        let p = ProcessParams::new(r, v1, v2, rho).unwrap();
        let m = absorbing_bound(&p).unwrap();
        for x in [0.0, m, u * m, rho.min(m), (rho - 1e-9).clamp(0.0, m)] {
            let y = p.step(x).unwrap();
            prop_assert!(
                (0.0..=m).contains(&y),
                "f({x}) = {y} outside [0, {m}] for {p:?}"
            );
        }
        Ok(())
    });
    let detail = match &result {
        Ok(()) => "1000 parameter sets, zero violations".to_string(),
        Err(e) => format!("{e}"),
    };
    report(10, "absorption", result.is_ok(), detail);
}

#[test]
fn wide_seeds_are_exact() {
    assert_eq!(Wide::new(1450.0, 53).to_f64(), 1450.0);
}
