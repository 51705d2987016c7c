//! Orbit diagnostics: cycle detection, omega-limit sampling, the
//! periodic-vs-Cantor classifier, sensitivity probes and visit frequencies.
//!
//! All routines are generic over the arithmetic of the [`Process`] they
//! iterate. Orbit values are projected to binary64 only for bookkeeping
//! (differences, clustering, counting); stepping always happens in the
//! process's own precision.

use serde::{Deserialize, Serialize};

use crate::numeric::{Precision, Real};
use crate::process::{absorbing_bound, absorption_steps, ChaoticConfig, Process};
use crate::semiconjugacy::{predict_frequency, GapSystem};

pub const DEFAULT_CYCLE_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_PERIOD: usize = 1000;
/// Number of grid points scanned by [`sensitivity_probe`].
pub const SENSITIVITY_GRID: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleStatus {
    Found,
    /// The budget was spent and no candidate period showed sustained
    /// recurrence.
    NotFound,
    /// The budget ran out while the orbit was still contracting towards a
    /// cycle, or was too small to test every period.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub status: CycleStatus,
    pub period: usize,
    pub cycle_points: Vec<f64>,
    pub transient_length: usize,
    /// `max |f^N(x) - x|` over the reported cycle points.
    pub residual: f64,
    pub iterations: usize,
}

impl CycleReport {
    pub fn found(&self) -> bool {
        self.status == CycleStatus::Found
    }

    fn without_cycle(status: CycleStatus, iterations: usize) -> Self {
        CycleReport {
            status,
            period: 0,
            cycle_points: Vec::new(),
            transient_length: 0,
            residual: f64::NAN,
            iterations,
        }
    }

    /// Whether two reports describe the same periodic orbit up to `tol`.
    pub fn same_cycle(&self, other: &CycleReport, tol: f64) -> bool {
        if !self.found() || !other.found() || self.period != other.period {
            return false;
        }
        self.cycle_points
            .iter()
            .all(|x| other.cycle_points.iter().any(|y| (x - y).abs() <= tol))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleOptions {
    pub max_iter: usize,
    pub max_period: usize,
    pub tol: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions {
            max_iter: 100_000,
            max_period: DEFAULT_MAX_PERIOD,
            tol: DEFAULT_CYCLE_TOL,
        }
    }
}

/// Length of the run of recurrences `|S_{n+N} - S_n| <= tol` ending at the
/// last available pair, scanning back no further than `floor`.
fn trailing_run(values: &[f64], period: usize, tol: f64, floor: usize, cap: usize) -> usize {
    let last = values.len() - 1;
    if last < period + floor {
        return 0;
    }
    let mut run = 0;
    let mut n = last - period;
    loop {
        if run == cap || (values[n + period] - values[n]).abs() > tol {
            return run;
        }
        run += 1;
        if n == floor {
            return run;
        }
        n -= 1;
    }
}

/// Searches the orbit of `s0` for the smallest period `N <= max_period`
/// whose recurrence `|S_{n+N} - S_n| <= tol` holds for `3N` consecutive
/// steps after the absorption transient.
pub fn detect_cycle<T: Real>(process: &Process<T>, s0: &T, opts: &CycleOptions) -> CycleReport {
    let max_period = opts.max_period.max(1);
    let burn_in = absorption_steps(process.params(), s0.to_f64().max(0.0)) as usize;
    let check_every = max_period.clamp(64, 4096);

    let mut values = Vec::with_capacity(opts.max_iter.min(1 << 24) + 1);
    let mut x = s0.clone();
    values.push(x.to_f64());
    let mut next_check = burn_in + 4;

    let check = |values: &[f64]| -> Option<usize> {
        (1..=max_period).find(|&n| trailing_run(values, n, opts.tol, burn_in, 3 * n) >= 3 * n)
    };

    for i in 1..=opts.max_iter {
        x = process.step(&x);
        values.push(x.to_f64());
        if i >= next_check || i == opts.max_iter {
            next_check = i + check_every;
            if let Some(n) = check(&values) {
                return found_report(&values, n, opts.tol);
            }
        }
    }

    let iterations = values.len() - 1;
    let testable = iterations >= burn_in + 4 * max_period;
    let c = process.params().contraction();
    let converging = (1..=max_period).any(|n| still_converging(&values, n, opts.tol, burn_in, c));
    let status = if !testable || converging {
        CycleStatus::Inconclusive
    } else {
        CycleStatus::NotFound
    };
    CycleReport::without_cycle(status, iterations)
}

/// Whether `|S_{n+N} - S_n|` is above `tol` but has shrunk by the map's
/// contraction `c^N` across each of the last four windows of length `N`,
/// which is exactly what happens once the itinerary has locked onto a
/// cycle of period `N`.
///
/// A sustained run of small differences shorter than `3N` is not evidence
/// on its own: orbits on a Cantor attractor return close to themselves at
/// lags near rotation denominators and stay close for one or two such lags
/// before separating again.
fn still_converging(values: &[f64], period: usize, tol: f64, floor: usize, c: f64) -> bool {
    const WINDOWS: usize = 4;
    let last = values.len() - 1;
    if last < floor + (WINDOWS + 1) * period {
        return false;
    }
    let window_max = |w: usize| {
        let end = last - period - w * period;
        (end + 1 - period..=end)
            .map(|n| (values[n + period] - values[n]).abs())
            .fold(0.0, f64::max)
    };
    let maxima: Vec<f64> = (0..WINDOWS).map(window_max).collect();
    let rate = c.powi(period as i32) * (1.0 + 1e-3);
    maxima[0] > tol && maxima.windows(2).all(|w| w[0] > 0.0 && w[0] <= rate * w[1])
}

fn found_report(values: &[f64], period: usize, tol: f64) -> CycleReport {
    let last = values.len() - 1;
    let run = trailing_run(values, period, tol, 0, usize::MAX);
    let transient_length = last - period + 1 - run;
    let start = last + 1 - period;
    let residual = (start - period..start)
        .map(|n| (values[n + period] - values[n]).abs())
        .fold(0.0, f64::max);
    CycleReport {
        status: CycleStatus::Found,
        period,
        cycle_points: values[start..].to_vec(),
        transient_length,
        residual,
        iterations: last,
    }
}

/// Sorted sample of an orbit clustered at a fixed radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaApprox {
    /// One orbit point per cluster (its smallest member), increasing.
    pub points: Vec<f64>,
    /// Extent `(min, max)` of each cluster.
    pub extents: Vec<(f64, f64)>,
    pub resolution: f64,
    pub burn_in: usize,
    pub samples: usize,
}

/// Single-linkage clustering of one-dimensional data: a new cluster starts
/// wherever consecutive sorted values are more than `resolution` apart.
pub fn cluster_sorted(sorted: &[f64], resolution: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some(last) if x - last.1 <= resolution => last.1 = x,
            _ => out.push((x, x)),
        }
    }
    out
}

/// Collects `S_burn_in, ..., S_{burn_in + samples - 1}` and clusters them.
pub fn omega_limit_approx<T: Real>(
    process: &Process<T>,
    s0: &T,
    burn_in: usize,
    samples: usize,
    resolution: f64,
) -> OmegaApprox {
    let mut sample: Vec<f64> = process
        .orbit(s0.clone())
        .skip(burn_in)
        .take(samples)
        .map(|x| x.to_f64())
        .collect();
    sample.sort_by(f64::total_cmp);
    let extents = cluster_sorted(&sample, resolution);
    OmegaApprox {
        points: extents.iter().map(|e| e.0).collect(),
        extents,
        resolution,
        burn_in,
        samples,
    }
}

impl OmegaApprox {
    /// Cluster counts of the same sample at each of `resolutions`.
    pub fn recluster(&self, sample: &[f64], resolutions: &[f64]) -> Vec<usize> {
        resolutions
            .iter()
            .map(|&r| cluster_sorted(sample, r).len())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyBudget {
    pub cycle: CycleOptions,
    pub burn_in: usize,
    pub samples: usize,
    /// Coarsest clustering radius; `None` uses `M / 400`.
    pub resolution: Option<f64>,
    /// Number of successive halvings of the radius.
    pub halvings: usize,
}

impl Default for ClassifyBudget {
    fn default() -> Self {
        ClassifyBudget {
            cycle: CycleOptions::default(),
            burn_in: 2000,
            samples: 20_000,
            resolution: None,
            halvings: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorEvidence {
    /// `(radius, cluster count)` from coarse to fine.
    pub cluster_counts: Vec<(f64, usize)>,
    pub hull: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Verdict {
    Periodic { cycles: Vec<CycleReport> },
    CantorLike { evidence: CantorEvidence },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Periodic { .. } => "periodic",
            Verdict::CantorLike { .. } => "cantor_like",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn periods(&self) -> Vec<usize> {
        match self {
            Verdict::Periodic { cycles } => cycles.iter().map(|c| c.period).collect(),
            _ => Vec::new(),
        }
    }

    pub fn total_period(&self) -> usize {
        self.periods().iter().sum()
    }
}

/// Decides between finitely many attracting cycles and a Cantor attractor
/// by following the two one-sided images of the discontinuity, `f(rho^-)`
/// and `f(rho)`, whose limit sets contain every other limit set.
pub fn classify_dichotomy<T: Real>(process: &Process<T>, budget: &ClassifyBudget) -> Verdict {
    let seeds = [
        process.left_limit_at_threshold(),
        process.image_of_threshold(),
    ];
    let reports: Vec<CycleReport> = seeds
        .iter()
        .map(|s| detect_cycle(process, s, &budget.cycle))
        .collect();

    if reports.iter().all(CycleReport::found) {
        let scale = absorbing_bound(process.params()).unwrap_or(1.0);
        let match_tol = 100.0 * budget.cycle.tol + 1e-12 * scale;
        let mut cycles = vec![reports[0].clone()];
        if !reports[1].same_cycle(&reports[0], match_tol) {
            cycles.push(reports[1].clone());
        }
        return Verdict::Periodic { cycles };
    }
    if reports
        .iter()
        .any(|r| r.status == CycleStatus::Inconclusive)
    {
        return Verdict::Inconclusive {
            reason: "cycle search ran out of budget while an orbit was still converging".into(),
        };
    }
    if reports.iter().any(CycleReport::found) {
        return Verdict::Inconclusive {
            reason: "only one critical orbit settled on a cycle".into(),
        };
    }

    let base = budget
        .resolution
        .unwrap_or_else(|| absorbing_bound(process.params()).unwrap_or(1.0) / 400.0);
    let mut sample: Vec<f64> = process
        .orbit(seeds[1].clone())
        .skip(budget.burn_in)
        .take(budget.samples)
        .map(|x| x.to_f64())
        .collect();
    sample.sort_by(f64::total_cmp);
    let cluster_counts: Vec<(f64, usize)> = (0..=budget.halvings)
        .map(|i| {
            let r = base / f64::powi(2.0, i as i32);
            (r, cluster_sorted(&sample, r).len())
        })
        .collect();
    let scaling = cluster_counts.windows(2).all(|w| w[1].1 > w[0].1);
    if scaling {
        Verdict::CantorLike {
            evidence: CantorEvidence {
                cluster_counts,
                hull: (sample[0], sample[sample.len() - 1]),
            },
        }
    } else {
        Verdict::Inconclusive {
            reason: format!("no recurrence, but cluster counts {cluster_counts:?} do not grow"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub s0: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub found: bool,
    pub witness_s0prime: f64,
    pub witness_k: usize,
    /// Separation at the witness, or the largest separation seen when no
    /// witness was found.
    pub achieved_separation: f64,
    pub precision: Precision,
}

/// Co-iterates `s0` with an evenly spaced grid of starting balances in
/// `[s0 - epsilon, s0 + epsilon]` and reports the first (smallest `k`, then
/// grid order) pair separated by at least `eta`.
pub fn sensitivity_probe_with<T: Real>(
    process: &Process<T>,
    s0: f64,
    epsilon: f64,
    eta: f64,
    max_iter: usize,
    precision: Precision,
) -> SensitivityReport {
    // keep the rounded endpoints within epsilon of s0
    let mut lo = (s0 - epsilon).max(0.0);
    while s0 - lo > epsilon {
        lo = lo.next_up();
    }
    let mut hi = s0 + epsilon;
    while hi - s0 > epsilon {
        hi = hi.next_down();
    }
    let grid: Vec<f64> = (0..SENSITIVITY_GRID)
        .map(|i| (lo + (hi - lo) * i as f64 / (SENSITIVITY_GRID - 1) as f64).clamp(lo, hi))
        .collect();
    let mut others: Vec<T> = grid.iter().map(|&g| process.lift(g)).collect();
    let mut reference = process.lift(s0);
    let mut best = 0.0f64;

    for k in 0..=max_iter {
        for (i, y) in others.iter().enumerate() {
            let d = y.distance(&reference);
            if d >= eta {
                return SensitivityReport {
                    s0,
                    epsilon,
                    eta,
                    found: true,
                    witness_s0prime: grid[i],
                    witness_k: k,
                    achieved_separation: d,
                    precision,
                };
            }
            best = best.max(d);
        }
        if k == max_iter {
            break;
        }
        reference = process.step(&reference);
        for y in others.iter_mut() {
            *y = process.step(y);
        }
    }
    SensitivityReport {
        s0,
        epsilon,
        eta,
        found: false,
        witness_s0prime: f64::NAN,
        witness_k: max_iter,
        achieved_separation: best,
        precision,
    }
}

/// Precision for a probe: enough bits to separate neighbouring grid points
/// after `max_iter` contractions.
pub fn sensitivity_precision(
    c: &ChaoticConfig,
    s0: f64,
    epsilon: f64,
    max_iter: usize,
) -> Precision {
    let (_, k_hi) = c.invariant_interval();
    let spacing = 2.0 * epsilon / (SENSITIVITY_GRID - 1) as f64;
    let magnitude = (s0 + epsilon).max(k_hi);
    let resolution_bits = (magnitude / spacing).log2().ceil().max(0.0) as usize;
    Precision::for_horizon(max_iter as u64, 1.0 / c.b, resolution_bits)
}

/// Horizon of the first pass of [`sensitivity_probe`].
const SENSITIVITY_FIRST_HORIZON: usize = 64;

/// Sensitivity probe for the chaotic family with `eta = 500 b (1 - 1/b)`.
///
/// Witnesses usually appear within a few dozen steps, so the probe runs
/// over doubling horizons, each at a precision sized to that horizon,
/// rather than paying for the whole budget's precision up front.
pub fn sensitivity_probe(
    c: &ChaoticConfig,
    s0: f64,
    epsilon: f64,
    max_iter: usize,
) -> SensitivityReport {
    let mut horizon = max_iter.min(SENSITIVITY_FIRST_HORIZON);
    loop {
        let precision = sensitivity_precision(c, s0, epsilon, horizon);
        let process = c.wide_process(precision.bits());
        let rep = sensitivity_probe_with(&process, s0, epsilon, c.eta(), horizon, precision);
        if rep.found || horizon == max_iter {
            return rep;
        }
        horizon = max_iter.min(horizon.saturating_mul(2));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub interval: (f64, f64),
    pub n: usize,
    pub count: usize,
    pub freq: f64,
    pub predicted: Option<f64>,
    pub prediction_error: Option<f64>,
}

/// Counts `0 <= n < N` with `S_n` in the closed interval.
pub fn visit_frequency<T: Real>(
    process: &Process<T>,
    s0: &T,
    interval: (f64, f64),
    n: usize,
) -> FrequencyReport {
    let (lo, hi) = interval;
    let lo_t = lo.is_finite().then(|| process.lift(lo));
    let hi_t = hi.is_finite().then(|| process.lift(hi));
    let count = process
        .orbit(s0.clone())
        .take(n)
        .filter(|x| lo_t.as_ref().is_none_or(|l| l <= x) && hi_t.as_ref().is_none_or(|h| x <= h))
        .count();
    FrequencyReport {
        interval,
        n,
        count,
        freq: if n == 0 { 0.0 } else { count as f64 / n as f64 },
        predicted: None,
        prediction_error: None,
    }
}

impl FrequencyReport {
    /// Attaches the ergodic prediction for the chaotic family.
    pub fn with_prediction(mut self, gs: &GapSystem, c: &ChaoticConfig) -> Self {
        let p = predict_frequency(gs, c, self.interval);
        self.predicted = Some(p.predicted);
        self.prediction_error = Some(p.truncation_error);
        self
    }
}
