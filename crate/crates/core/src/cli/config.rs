//! Run configuration: a TOML file with nested tables, overridden key by key
//! by command-line flags.
//!
//! ```toml
//! [chaotic]            # or [params] with r, v1, v2, rho
//! b = 2.0
//! precision_target = 1e-13
//!
//! [run]
//! s0 = [1450.0, 1380.0]
//! window = 150
//! interval = [1400.0, 1600.0]
//!
//! [sweep]
//! r = { min = -0.55, max = -0.46, step = 0.01 }
//! rho = { min = 1200.0, max = 1800.0, step = 60.0 }
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{Args, CliError, PrecisionMode};
use crate::analysis::{DEFAULT_CYCLE_TOL, DEFAULT_MAX_PERIOD};
use crate::process::{chaotic_params, ChaoticConfig, ProcessParams, DEFAULT_PRECISION_TARGET};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub params: Option<ParamsSection>,
    #[serde(default)]
    pub chaotic: Option<ChaoticSection>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub r: Option<f64>,
    pub v1: Option<f64>,
    pub v2: Option<f64>,
    pub rho: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaoticSection {
    pub b: Option<f64>,
    pub precision_target: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub s0: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub window: Option<usize>,
    pub interval: Option<[f64; 2]>,
    pub burn_in: Option<usize>,
    pub samples: Option<usize>,
    pub resolution: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iter: Option<usize>,
    pub max_period: Option<usize>,
    pub tol: Option<f64>,
    pub order: Option<usize>,
    pub out: Option<PathBuf>,
    pub precision: Option<PrecisionMode>,
    pub bits: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    /// A single-value axis.
    pub fn point(x: f64) -> Self {
        Axis {
            min: x,
            max: x,
            step: 1.0,
        }
    }

    /// `min, min + step, ...` up to `max` (inclusive, with a small
    /// allowance for accumulated rounding in `(max - min) / step`).
    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(CliError::Config(format!("sweep axis {name} is not finite")));
        }
        if !(self.step > 0.0) {
            return Err(CliError::Config(format!(
                "sweep axis {name} needs a positive step, got {}",
                self.step
            )));
        }
        if self.max < self.min {
            return Err(CliError::Config(format!(
                "sweep axis {name} is empty: max {} < min {}",
                self.max, self.min
            )));
        }
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.min + i as f64 * self.step)
            .collect())
    }

    fn parse(name: &str, s: &str) -> Result<Self, CliError> {
        let parts = parse_list(name, s)?;
        match parts[..] {
            [x] => Ok(Axis::point(x)),
            [min, max, step] => Ok(Axis { min, max, step }),
            _ => Err(CliError::Config(format!(
                "--{name} expects `value` or `min,max,step`, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub r: Option<Axis>,
    pub v1: Option<Axis>,
    pub v2: Option<Axis>,
    pub rho: Option<Axis>,
}

/// Grid of parameter sets for `sweep`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub r: Axis,
    pub v1: Axis,
    pub v2: Axis,
    pub rho: Axis,
}

impl SweepSpec {
    /// All grid cells in lexicographic order of `(r, v1, v2, rho)`.
    pub fn cells(&self) -> Result<Vec<ProcessParams>, CliError> {
        let (rs, v1s, v2s, rhos) = (
            self.r.values("r")?,
            self.v1.values("v1")?,
            self.v2.values("v2")?,
            self.rho.values("rho")?,
        );
        let mut out = Vec::with_capacity(rs.len() * v1s.len() * v2s.len() * rhos.len());
        for &r in &rs {
            for &v1 in &v1s {
                for &v2 in &v2s {
                    for &rho in &rhos {
                        out.push(ProcessParams::new(r, v1, v2, rho).map_err(config_err)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Explicit(ProcessParams),
    Chaotic(ChaoticConfig),
}

impl Model {
    pub fn params(&self) -> ProcessParams {
        match self {
            Model::Explicit(p) => *p,
            Model::Chaotic(c) => c.params(),
        }
    }

    pub fn chaotic(&self) -> Option<&ChaoticConfig> {
        match self {
            Model::Chaotic(c) => Some(c),
            Model::Explicit(_) => None,
        }
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Option<Model>,
    pub s0: Vec<f64>,
    pub n: usize,
    pub window: usize,
    pub interval: Option<(f64, f64)>,
    pub burn_in: usize,
    pub samples: usize,
    pub resolution: Option<f64>,
    pub epsilon: f64,
    /// Explicit iteration budget; each command has its own default.
    pub max_iter: Option<usize>,
    pub max_period: usize,
    pub tol: Option<f64>,
    pub order: Option<usize>,
    pub out: Option<PathBuf>,
    pub precision: PrecisionMode,
    pub bits: Option<usize>,
    pub sweep: SweepSpec,
}

impl RunConfig {
    pub fn model(&self) -> Result<&Model, CliError> {
        self.model.as_ref().ok_or_else(|| {
            CliError::Config(
                "no process given: pass --r --v1 --v2 --rho or --chaotic-b (or a config file)"
                    .into(),
            )
        })
    }

    pub fn cycle_tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_CYCLE_TOL)
    }
}

pub fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn parse_list(name: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("--{name}: `{t}` is not a number")))
        })
        .collect()
}

/// Parses `lo,hi` into a closed interval.
pub fn parse_interval(s: &str) -> Result<(f64, f64), CliError> {
    match parse_list("J", s)?[..] {
        [lo, hi] => check_interval(lo, hi),
        _ => Err(CliError::Config(format!("--J expects `lo,hi`, got `{s}`"))),
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<(f64, f64), CliError> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(CliError::Config(format!(
            "interval [{lo}, {hi}] is malformed"
        )));
    }
    Ok((lo, hi))
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

fn explicit_model(
    r: Option<f64>,
    v1: Option<f64>,
    v2: Option<f64>,
    rho: Option<f64>,
) -> Result<Model, CliError> {
    match (r, v1, v2, rho) {
        (Some(r), Some(v1), Some(v2), Some(rho)) => Ok(Model::Explicit(
            ProcessParams::new(r, v1, v2, rho).map_err(config_err)?,
        )),
        _ => Err(CliError::Config(
            "explicit parameters need all of r, v1, v2 and rho".into(),
        )),
    }
}

fn chaotic_model(b: f64, target: Option<f64>) -> Result<Model, CliError> {
    let target = target.unwrap_or(DEFAULT_PRECISION_TARGET);
    Ok(Model::Chaotic(
        chaotic_params(b, target).map_err(config_err)?,
    ))
}

/// Picks the process from one source, rejecting a source that names both
/// kinds.
fn model_from(
    explicit: [Option<f64>; 4],
    b: Option<f64>,
    target: Option<f64>,
    source: &str,
) -> Result<Option<Model>, CliError> {
    let any_explicit = explicit.iter().any(Option::is_some);
    match (any_explicit, b) {
        (true, Some(_)) => Err(CliError::Config(format!(
            "{source} gives both explicit parameters and a chaotic base; choose one"
        ))),
        (true, None) => {
            let [r, v1, v2, rho] = explicit;
            explicit_model(r, v1, v2, rho).map(Some)
        }
        (false, Some(b)) => chaotic_model(b, target).map(Some),
        (false, None) => Ok(None),
    }
}

impl RunConfig {
    /// Iteration budget for cycle detection.
    pub fn cycle_max_iter(&self) -> usize {
        self.max_iter.unwrap_or(100_000)
    }

    /// Iteration budget for the sensitivity probe, which pays for precision
    /// in proportion to its horizon.
    pub fn sensitivity_max_iter(&self) -> usize {
        self.max_iter.unwrap_or(1000)
    }

    pub fn resolve(args: &Args) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => load_file(p)?,
            None => FileConfig::default(),
        };
        let run = &file.run;

        // a swept parameter needs no base value; its axis minimum stands in
        let sweep_file = file.sweep.clone().unwrap_or_default();
        let axis_min =
            |flag: &Option<String>, from_file: Option<Axis>, name: &str| match (flag, from_file) {
                (Some(s), _) => Axis::parse(name, s).map(|a| Some(a.min)),
                (None, a) => Ok(a.map(|a| a.min)),
            };
        let mins = [
            axis_min(&args.sweep_r, sweep_file.r, "sweep-r")?,
            axis_min(&args.sweep_v1, sweep_file.v1, "sweep-v1")?,
            axis_min(&args.sweep_v2, sweep_file.v2, "sweep-v2")?,
            axis_min(&args.sweep_rho, sweep_file.rho, "sweep-rho")?,
        ];
        let fill = |given: [Option<f64>; 4]| -> [Option<f64>; 4] {
            if given.iter().any(Option::is_some) {
                std::array::from_fn(|i| given[i].or(mins[i]))
            } else {
                given
            }
        };

        let flag_model = model_from(
            fill([args.r, args.v1, args.v2, args.rho]),
            args.chaotic_b,
            args.precision_target,
            "the command line",
        )?;
        let model = match flag_model {
            Some(m) => Some(m),
            None => {
                let p = file.params.as_ref();
                let c = file.chaotic.as_ref();
                if file.params.is_some() && file.chaotic.is_some() {
                    return Err(CliError::Config(
                        "config file has both [params] and [chaotic]; choose one".into(),
                    ));
                }
                let from_file = model_from(
                    fill([
                        p.and_then(|p| p.r),
                        p.and_then(|p| p.v1),
                        p.and_then(|p| p.v2),
                        p.and_then(|p| p.rho),
                    ]),
                    c.and_then(|c| c.b),
                    args.precision_target.or(c.and_then(|c| c.precision_target)),
                    "the config file",
                )?;
                match from_file {
                    Some(m) => Some(m),
                    None if args.chaotic_b.is_none() && mins.iter().any(Option::is_some) => {
                        model_from(mins, None, None, "the sweep axes")?
                    }
                    None => None,
                }
            }
        };

        let interval = match (&args.interval, run.interval) {
            (Some(s), _) => Some(parse_interval(s)?),
            (None, Some([lo, hi])) => Some(check_interval(lo, hi)?),
            (None, None) => None,
        };
        let s0 = if !args.s0.is_empty() {
            args.s0.clone()
        } else {
            run.s0.clone().unwrap_or_else(|| vec![0.0])
        };
        if let Some(bad) = s0.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(CliError::Config(format!(
                "initial balance {bad} must be non-negative"
            )));
        }
        let positive = |name: &str, x: Option<f64>| match x {
            Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::Config(format!(
                "--{name} must be positive, got {v}"
            ))),
            _ => Ok(x),
        };
        let resolution = positive("resolution", args.resolution.or(run.resolution))?;
        let epsilon = positive("epsilon", args.epsilon.or(run.epsilon))?.unwrap_or(1e-6);
        let tol = args.tol.or(run.tol);
        if let Some(t) = tol {
            if !(t >= 0.0) {
                return Err(CliError::Config(format!(
                    "--tol must be non-negative, got {t}"
                )));
            }
        }
        let window = args.window.or(run.window).unwrap_or(150);
        if window == 0 {
            return Err(CliError::Config("--N must be at least 1".into()));
        }

        let base = model.as_ref().map(Model::params);
        let axis = |flag: &Option<String>,
                    from_file: Option<Axis>,
                    name: &str,
                    default: Option<f64>|
         -> Result<Axis, CliError> {
            match (flag, from_file, default) {
                (Some(s), _, _) => Axis::parse(name, s),
                (None, Some(a), _) => Ok(a),
                (None, None, Some(x)) => Ok(Axis::point(x)),
                (None, None, None) => Ok(Axis::point(f64::NAN)),
            }
        };
        let sweep = SweepSpec {
            r: axis(&args.sweep_r, sweep_file.r, "sweep-r", base.map(|p| p.r))?,
            v1: axis(
                &args.sweep_v1,
                sweep_file.v1,
                "sweep-v1",
                base.map(|p| p.v1),
            )?,
            v2: axis(
                &args.sweep_v2,
                sweep_file.v2,
                "sweep-v2",
                base.map(|p| p.v2),
            )?,
            rho: axis(
                &args.sweep_rho,
                sweep_file.rho,
                "sweep-rho",
                base.map(|p| p.rho),
            )?,
        };

        Ok(RunConfig {
            model,
            s0,
            n: args.n.or(run.n).unwrap_or(100),
            window,
            interval,
            burn_in: args.burn_in.or(run.burn_in).unwrap_or(2000),
            samples: args.samples.or(run.samples).unwrap_or(20_000),
            resolution,
            epsilon,
            max_iter: args.max_iter.or(run.max_iter),
            max_period: args
                .max_period
                .or(run.max_period)
                .unwrap_or(DEFAULT_MAX_PERIOD),
            tol,
            order: args.order.or(run.order),
            out: args.out.clone().or_else(|| run.out.clone()),
            precision: args
                .precision
                .or(run.precision)
                .unwrap_or(PrecisionMode::Auto),
            bits: args.bits.or(run.bits),
            sweep,
        })
    }
}
