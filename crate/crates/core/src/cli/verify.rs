//! Built-in self-checks: the invariants of every module at modest budgets,
//! each timed and reported as PASS or FAIL.
//!
//! `--tol` replaces the tolerance of every check that has one (so `--tol 0`
//! is a negative control), and `--order` sets the gap truncation used by
//! the semiconjugacy checks.

use std::fmt::Write;
use std::time::{Duration, Instant};

use super::commands::{cmd_freq, cmd_simulate, fmt_sig17};
use super::config::{Model, RunConfig};
use crate::analysis::{
    classify_dichotomy, detect_cycle, omega_limit_approx, sensitivity_probe, visit_frequency,
    ClassifyBudget, CycleOptions, Verdict,
};
use crate::numeric::Precision;
use crate::process::{absorbing_bound, chaotic_params, closed_form, ChaoticConfig, ProcessParams};
use crate::semiconjugacy::{
    breakpoint_from_gaps, predict_frequency, semiconjugacy_residual, GapEntry, GapSystem,
    ResidualCheck, POSITION_FUZZ,
};
use crate::words::{fibonacci_word, rotation_coding, RotationParams};

const PRINTED_WORD: &str = "010010100100101001010010010100100101001010010010100";
const DEFAULT_ORDER: usize = 60;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<38} {:>10.3}s  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.elapsed.as_secs_f64(),
                c.detail
            );
        }
        let total: Duration = self.checks.iter().map(|c| c.elapsed).sum();
        let _ = writeln!(
            out,
            "{} passed, {} failed in {:.3}s",
            self.checks.len() - self.failures(),
            self.failures(),
            total.as_secs_f64()
        );
        out
    }
}

struct Ctx {
    tol: Option<f64>,
    order: usize,
    chaotic: ChaoticConfig,
}

impl Ctx {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

type Outcome = (bool, String);

fn words_prefix(_: &Ctx) -> Outcome {
    let w = fibonacci_word(51)
        .map(|w| w.to_string())
        .unwrap_or_default();
    (w == PRINTED_WORD, w)
}

fn words_prefix_property(_: &Ctx) -> Outcome {
    let long = fibonacci_word(4181).expect("non-empty");
    let bad: Vec<usize> = [1, 2, 13, 55, 377, 1000, 2584]
        .into_iter()
        .filter(|&n| !fibonacci_word(n).expect("non-empty").is_prefix_of(&long))
        .collect();
    (bad.is_empty(), format!("non-prefix lengths {bad:?}"))
}

fn words_runs(_: &Ctx) -> Outcome {
    let w = fibonacci_word(100_000).expect("non-empty");
    let (ones, zeros) = (w.longest_run(1), w.longest_run(0));
    (
        ones == 1 && zeros == 2,
        format!("longest runs: 1s {ones}, 0s {zeros}"),
    )
}

fn words_rotation_coding(_: &Ctx) -> Outcome {
    let rp = RotationParams::golden();
    let coding = rotation_coding(&rp, rp.alpha(), 1000).expect("valid start");
    let word = fibonacci_word(1000).expect("non-empty");
    let mismatch = coding
        .iter()
        .zip(word.digits())
        .position(|(c, w)| c - 1 != *w);
    (mismatch.is_none(), format!("first mismatch {mismatch:?}"))
}

/// Deterministic spread of parameter sets over the admissible region.
fn parameter_grid() -> Vec<ProcessParams> {
    let rs = [
        -0.999, -0.9, -0.75, -0.5, -0.33, -0.2, -0.1, -0.05, -0.01, -0.001,
    ];
    let vs: [f64; 10] = [
        0.0, 0.5, 1.0, 10.0, 250.0, 500.0, 999.0, 1000.0, 3000.0, 1e6,
    ];
    let rhos = [
        1e-3, 1.0, 100.0, 1234.5, 1500.0, 1709.8, 5000.0, 1e5, 1e7, 1e9,
    ];
    let mut out = Vec::new();
    for &r in &rs {
        for &v1 in &vs {
            for &v2 in &vs {
                for &rho in &rhos {
                    if v1.max(v2) > 0.0 {
                        out.push(ProcessParams { r, v1, v2, rho });
                    }
                }
            }
        }
    }
    out
}

fn process_absorption(_: &Ctx) -> Outcome {
    let grid = parameter_grid();
    let mut violations = 0;
    for p in &grid {
        let m = absorbing_bound(p).expect("positive deposit");
        for x in [
            0.0,
            0.25 * m,
            0.5 * m,
            m,
            p.rho.min(m),
            p.rho.next_down().clamp(0.0, m),
        ] {
            if !(0.0..=m).contains(&p.apply(x)) {
                violations += 1;
            }
        }
    }
    (
        violations == 0,
        format!("{} parameter sets, {violations} violations", grid.len()),
    )
}

fn process_contraction(_: &Ctx) -> Outcome {
    let mut worst = 0.0f64;
    for p in parameter_grid().iter().step_by(7) {
        let m = absorbing_bound(p).expect("positive deposit");
        for i in 0..20 {
            let x = m * i as f64 / 20.0;
            let y = x + m / 37.0;
            if (x < p.rho) != (y < p.rho) {
                continue;
            }
            let lhs = (p.apply(x) - p.apply(y)).abs();
            let rhs = p.contraction() * (x - y).abs();
            let ulp = f64::EPSILON * p.apply(x).abs().max(p.apply(y).abs());
            worst = worst.max((lhs - rhs) / ulp.max(f64::MIN_POSITIVE));
        }
    }
    (worst <= 4.0, format!("worst excess {worst:.2} ulp"))
}

fn process_closed_form(ctx: &Ctx) -> Outcome {
    let tol = ctx.tol(1e-9);
    let p = ProcessParams::new(-0.5, 500.0, 500.0, 700.0).expect("valid");
    let mut worst = 0.0f64;
    for i in 0..20 {
        let s0 = 4000.0 * i as f64 / 19.0;
        let mut x = s0;
        for n in 0..=1000u64 {
            let exact = closed_form(500.0, -0.5, s0, n).expect("valid");
            worst = worst.max((x - exact).abs() / exact.abs().max(f64::MIN_POSITIVE));
            x = p.apply(x);
        }
    }
    (
        worst <= tol,
        format!("worst relative error {worst:.2e} (tol {tol:e})"),
    )
}

fn process_chaotic_threshold(ctx: &Ctx) -> Outcome {
    let tol = ctx.tol(1e-12);
    let err = (ctx.chaotic.rho - 1709.8034428612914).abs();
    (
        err <= tol,
        format!(
            "rho = {} (error {err:.1e}, tol {tol:e})",
            fmt_sig17(ctx.chaotic.rho)
        ),
    )
}

fn gaps(ctx: &Ctx, order: usize) -> Result<GapSystem, String> {
    GapSystem::golden(ctx.chaotic.b, order).map_err(|e| e.to_string())
}

fn semiconjugacy_monotone(ctx: &Ctx) -> Outcome {
    let gs = match gaps(ctx, ctx.order) {
        Ok(g) => g,
        Err(e) => return (false, e),
    };
    let mut prev = gs.h(0.0);
    let mut decreasing = 0;
    for i in 1..=10_000 {
        let h = gs.h(i as f64 / 10_000.0);
        if h < prev {
            decreasing += 1;
        }
        prev = h;
    }
    // gaps narrower than the rounding fuzz share endpoints with their
    // neighbours in binary64 and cannot be told apart by position
    let (resolved, unresolved): (Vec<&GapEntry>, Vec<&GapEntry>) =
        gs.entries().iter().partition(|e| e.length > POSITION_FUZZ);
    let off_point = resolved
        .iter()
        .filter(|e| gs.h(e.left) != e.point || gs.h(e.left + 0.5 * e.length) != e.point)
        .count();
    (
        decreasing == 0 && off_point == 0 && gs.ordering_violations().is_empty(),
        format!(
            "order {}: {decreasing} decreases, {off_point} gaps off their point, \
             {} below binary64 resolution",
            gs.order(),
            unresolved.len()
        ),
    )
}

fn semiconjugacy_residual_check(ctx: &Ctx) -> Outcome {
    let tol = ctx.tol(1e-9);
    let gs = match gaps(ctx, ctx.order) {
        Ok(g) => g,
        Err(e) => return (false, e),
    };
    let m = ctx.chaotic.normalized_map();
    let mut worst = 0.0f64;
    let mut excluded = 0;
    for i in 0..1000 {
        match semiconjugacy_residual(&gs, &m, (i as f64 + 0.5) / 1000.0) {
            Ok(ResidualCheck::Measured(r)) => worst = worst.max(r),
            Ok(ResidualCheck::Inconclusive) => excluded += 1,
            Err(e) => return (false, e.to_string()),
        }
    }
    let tail = 2.0 * gs.tail_mass();
    let bound = tail + tol;
    let coarse = tail > tol;
    let detail = format!(
        "order {}: max residual {worst:.2e}, bound {bound:.2e}, {excluded} excluded",
        gs.order()
    );
    if coarse {
        return (
            false,
            format!(
                "{detail}; tail bound {tail:.2e} exceeds tolerance {tol:e}, truncation too coarse"
            ),
        );
    }
    (worst <= bound, detail)
}

fn semiconjugacy_breakpoint(ctx: &Ctx) -> Outcome {
    let gs = match gaps(ctx, 20) {
        Ok(g) => g,
        Err(e) => return (false, e),
    };
    let x1 = ctx.chaotic.normalized_map().breakpoint;
    let err = (breakpoint_from_gaps(&gs) - x1).abs();
    let bound = 2.0 * gs.tail_mass();
    (
        err <= bound,
        format!("order 20: error {err:.2e}, bound {bound:.2e}"),
    )
}

fn semiconjugacy_complement(ctx: &Ctx) -> Outcome {
    let gs = match gaps(ctx, ctx.order) {
        Ok(g) => g,
        Err(e) => return (false, e),
    };
    let c = &ctx.chaotic;
    let (lo, hi) = c.invariant_interval();
    let mut worst = 0.0f64;
    let mut ok = true;
    for split in [1400.0, 1500.0, 1600.0, 1709.8, 1800.0] {
        let a = predict_frequency(&gs, c, (lo, split));
        let b = predict_frequency(&gs, c, (split, hi));
        let dev = (a.predicted + b.predicted - 1.0).abs();
        worst = worst.max(dev);
        ok &= dev <= 2.0 * (a.truncation_error + b.truncation_error);
    }
    (ok, format!("worst |sum - 1| = {worst:.2e}"))
}

fn analysis_two_cycle(ctx: &Ctx) -> Outcome {
    let tol = ctx.tol(1e-9);
    let p = ProcessParams::new(-0.5, 1000.0, 500.0, 1500.0).expect("valid");
    let r = detect_cycle(&p.process::<f64>(&()), &0.0, &CycleOptions::default());
    let mut pts = r.cycle_points.clone();
    pts.sort_by(f64::total_cmp);
    let err = match pts[..] {
        [a, b] => (a - 4000.0 / 3.0).abs().max((b - 5000.0 / 3.0).abs()),
        _ => f64::INFINITY,
    };
    (
        r.found() && r.period == 2 && err <= tol,
        format!("period {} points {pts:?}, error {err:.1e}", r.period),
    )
}

fn analysis_classify_periodic(_: &Ctx) -> Outcome {
    let budget = ClassifyBudget::default();
    let two = ProcessParams::new(-0.5, 1000.0, 500.0, 1500.0).expect("valid");
    let fixed = ProcessParams::new(-0.5, 500.0, 500.0, 1500.0).expect("valid");
    let a = classify_dichotomy(&two.process::<f64>(&()), &budget);
    let b = classify_dichotomy(&fixed.process::<f64>(&()), &budget);
    (
        a.periods() == [2] && b.periods() == [1],
        format!("periods {:?} and {:?}", a.periods(), b.periods()),
    )
}

fn extended_bits(steps: usize) -> usize {
    Precision::for_horizon(steps as u64, 0.5, 0).bits()
}

fn analysis_classify_chaotic(ctx: &Ctx) -> Outcome {
    let budget = ClassifyBudget::default();
    let p = ctx
        .chaotic
        .wide_process(extended_bits(budget.cycle.max_iter));
    match classify_dichotomy(&p, &budget) {
        Verdict::CantorLike { evidence } => (
            true,
            format!("cantor_like, cluster counts {:?}", evidence.cluster_counts),
        ),
        other => (false, format!("verdict {}", other.name())),
    }
}

/// Cluster representatives of the chaotic attractor from `s0 = 1450`.
fn attractor_sample(ctx: &Ctx, resolution: f64) -> Vec<(f64, f64)> {
    let p = ctx.chaotic.wide_process(extended_bits(22_000));
    omega_limit_approx(&p, &p.lift(1450.0), 2_000, 20_000, resolution).extents
}

fn analysis_omega_support(ctx: &Ctx) -> Outcome {
    let c = &ctx.chaotic;
    let (lo, hi) = c.invariant_interval();
    let (g_lo, g_hi) = c.excluded_gap();
    let clusters = attractor_sample(ctx, 1.25);
    let outside = clusters.iter().filter(|e| e.0 < lo || e.1 > hi).count();
    // the gap is open and its endpoints are attained; allow for rounding
    let margin = 1e-9 * hi;
    let in_gap = clusters
        .iter()
        .filter(|e| e.1 > g_lo + margin && e.0 < g_hi - margin)
        .count();
    (
        outside == 0 && in_gap == 0,
        format!(
            "{} clusters; {outside} outside K, {in_gap} inside ({:.4}, {:.4})",
            clusters.len(),
            g_lo,
            g_hi
        ),
    )
}

fn analysis_sensitivity(ctx: &Ctx) -> Outcome {
    let c = &ctx.chaotic;
    let clusters = attractor_sample(ctx, 0.5);
    let stride = (clusters.len() / 10).max(1);
    let mut failures = Vec::new();
    let mut probes = 0;
    for (i, e) in clusters.iter().step_by(stride).take(10).enumerate() {
        let eps = if i == 0 { 1e-8 } else { 1e-6 };
        let r = sensitivity_probe(c, e.0, eps, 200);
        probes += 1;
        if !(r.found && r.achieved_separation >= c.eta()) {
            failures.push(e.0);
        }
    }
    (
        failures.is_empty() && probes == 10,
        format!("{probes} probes, eta {}, failures at {failures:?}", c.eta()),
    )
}

fn analysis_ergodic(ctx: &Ctx) -> Outcome {
    let c = &ctx.chaotic;
    let n = 100_000;
    let j = (1400.0, 1600.0);
    let p = c.wide_process(extended_bits(n));
    let freqs: Vec<f64> = [1450.0, 1380.0, 1023.0, 1900.0, 800.0]
        .iter()
        .map(|&s0| visit_frequency(&p, &p.lift(s0), j, n).freq)
        .collect();
    let spread = freqs.iter().cloned().fold(f64::MIN, f64::max)
        - freqs.iter().cloned().fold(f64::MAX, f64::min);
    let pred = match gaps(ctx, ctx.order) {
        Ok(gs) => predict_frequency(&gs, c, j),
        Err(e) => return (false, e),
    };
    let dev = freqs
        .iter()
        .map(|f| (f - pred.predicted).abs())
        .fold(0.0, f64::max);
    let spread_tol = ctx.tol(2e-3);
    let dev_tol = pred.truncation_error + ctx.tol(10.0 / n as f64);
    (
        spread <= spread_tol && dev <= dev_tol,
        format!(
            "spread {spread:.1e} (tol {spread_tol:e}), deviation from {:.6} is {dev:.1e} (tol {dev_tol:.1e})",
            pred.predicted
        ),
    )
}

fn cli_config(ctx: &Ctx, s0: Vec<f64>) -> RunConfig {
    let args = super::Args::default();
    let mut cfg = RunConfig::resolve(&args).expect("defaults resolve");
    cfg.model = Some(Model::Chaotic(ctx.chaotic));
    cfg.s0 = s0;
    cfg.n = 1000;
    cfg.window = 1000;
    cfg.interval = Some((1400.0, 1600.0));
    cfg
}

fn parse_column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .filter_map(|l| l.split(',').nth(col)?.parse().ok())
        .collect()
}

fn cli_replay(ctx: &Ctx) -> Outcome {
    let cfg = cli_config(ctx, vec![1450.0]);
    let csv = match cmd_simulate(&cfg) {
        Ok(s) => s,
        Err(e) => return (false, e.to_string()),
    };
    let p = ctx.chaotic.params();
    let values = parse_column(&csv, 1);
    let mismatch = values.windows(2).position(|w| p.apply(w[0]) != w[1]);
    (
        values.len() == 1001 && mismatch.is_none(),
        format!("{} rows, first mismatch {mismatch:?}", values.len()),
    )
}

fn cli_recount(ctx: &Ctx) -> Outcome {
    let seeds = vec![1450.0, 800.0];
    let cfg = cli_config(ctx, seeds.clone());
    let (sim, freq) = match (cmd_simulate(&cfg), cmd_freq(&cfg)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return (false, e.to_string()),
    };
    let rows: Vec<(f64, f64)> = sim
        .lines()
        .skip(1)
        .filter_map(|l| {
            let mut it = l.split(',');
            let s0 = it.next()?.parse().ok()?;
            let _n = it.next()?;
            Some((s0, it.next()?.parse().ok()?))
        })
        .collect();
    let counts: Vec<f64> = parse_column(&freq, 1);
    let recount: Vec<f64> = seeds
        .iter()
        .map(|&s| {
            rows.iter()
                .filter(|(s0, x)| *s0 == s && (1400.0..=1600.0).contains(x))
                .take(cfg.window)
                .count() as f64
        })
        .collect();
    (
        counts == recount,
        format!("freq {counts:?}, recount {recount:?}"),
    )
}

fn cli_determinism(ctx: &Ctx) -> Outcome {
    let cfg = cli_config(ctx, vec![1450.0, 1023.0]);
    let same = cmd_simulate(&cfg).ok() == cmd_simulate(&cfg).ok()
        && cmd_freq(&cfg).ok() == cmd_freq(&cfg).ok();
    (same, "repeated runs byte-identical".into())
}

type CheckFn = fn(&Ctx) -> Outcome;

const CHECKS: &[(&str, CheckFn)] = &[
    ("words.fibonacci_prefix", words_prefix),
    ("words.prefix_property", words_prefix_property),
    ("words.run_lengths", words_runs),
    ("words.rotation_coding", words_rotation_coding),
    ("process.absorption", process_absorption),
    ("process.contraction", process_contraction),
    ("process.closed_form", process_closed_form),
    ("process.chaotic_threshold", process_chaotic_threshold),
    ("semiconjugacy.monotone_h", semiconjugacy_monotone),
    ("semiconjugacy.residual", semiconjugacy_residual_check),
    ("semiconjugacy.breakpoint", semiconjugacy_breakpoint),
    (
        "semiconjugacy.complementary_frequency",
        semiconjugacy_complement,
    ),
    ("analysis.two_cycle", analysis_two_cycle),
    ("analysis.classify_periodic", analysis_classify_periodic),
    ("analysis.classify_chaotic", analysis_classify_chaotic),
    ("analysis.omega_support", analysis_omega_support),
    ("analysis.sensitivity", analysis_sensitivity),
    ("analysis.ergodic_frequency", analysis_ergodic),
    ("cli.replay", cli_replay),
    ("cli.recount", cli_recount),
    ("cli.determinism", cli_determinism),
];

pub fn cmd_verify(cfg: &RunConfig) -> VerifyReport {
    let chaotic = match cfg.model.as_ref().and_then(Model::chaotic) {
        Some(c) if c.b == 2.0 => *c,
        _ => chaotic_params(2.0, 1e-13).expect("b = 2 is valid"),
    };
    let ctx = Ctx {
        tol: cfg.tol,
        order: cfg.order.unwrap_or(DEFAULT_ORDER),
        chaotic,
    };
    let checks = CHECKS
        .iter()
        .map(|&(name, f)| {
            let start = Instant::now();
            let (passed, detail) = f(&ctx);
            Check {
                name,
                passed,
                detail,
                elapsed: start.elapsed(),
            }
        })
        .collect();
    VerifyReport { checks }
}
