//! Subcommand implementations. Each returns the text it would print so the
//! commands can be composed and tested without a subprocess.

use std::fmt::Write;

use rayon::prelude::*;
use serde_json::json;

use super::config::{Model, RunConfig};
use super::{CliError, PrecisionMode};
use crate::analysis::{
    classify_dichotomy, sensitivity_probe, sensitivity_probe_with, visit_frequency, ClassifyBudget,
    CycleOptions, Verdict,
};
use crate::numeric::{Bits, Precision, Wide};
use crate::process::{simulate_with, ChaoticConfig, Process, ProcessParams};
use crate::semiconjugacy::{predict_frequency, GapSystem};

/// Gap truncation used for frequency predictions: tail below `1e-15`.
pub fn prediction_order(b: f64) -> usize {
    (15.0 * 10f64.ln() / b.ln()).ceil().max(1.0) as usize
}

/// Decimal text with 17 significant digits, which round-trips binary64.
/// Very large or small magnitudes use scientific notation.
pub fn fmt_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.16}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        let s = format!("{x:.decimals$}");
        // log10 can land one short near powers of ten
        if s.trim_start_matches('-')
            .replace('.', "")
            .trim_start_matches('0')
            .len()
            > 17
        {
            return format!("{x:.prec$}", prec = decimals.saturating_sub(1));
        }
        s
    } else {
        format!("{x:.16e}")
    }
}

/// An orbit engine in one of the two arithmetics.
pub enum Engine {
    Double(Process<f64>),
    Extended(Process<Wide>),
}

impl Engine {
    pub fn precision(&self) -> Precision {
        match self {
            Engine::Double(_) => Precision::Double,
            Engine::Extended(p) => Precision::Extended {
                bits: p.context().0,
            },
        }
    }
}

/// Calls `$body` with `$p` bound to the engine's process, whatever its
/// arithmetic.
macro_rules! with_engine {
    ($engine:expr, |$p:ident| $body:expr) => {
        match $engine {
            Engine::Double($p) => $body,
            Engine::Extended($p) => $body,
        }
    };
}

/// Builds the process for `model`. `horizon` is the number of steps the
/// command will take; `auto_extended` says what `auto` means here.
pub fn engine(cfg: &RunConfig, model: &Model, horizon: usize, auto_extended: bool) -> Engine {
    let extended = match cfg.precision {
        PrecisionMode::Double => false,
        PrecisionMode::Extended => true,
        PrecisionMode::Auto => auto_extended,
    };
    if !extended {
        return Engine::Double(model.params().process(&()));
    }
    let c = model.params().contraction();
    let bits = cfg
        .bits
        .unwrap_or_else(|| Precision::for_horizon(horizon as u64, c, 0).bits());
    Engine::Extended(match model {
        Model::Chaotic(cc) => cc.wide_process(bits),
        Model::Explicit(p) => p.process(&Bits(bits)),
    })
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<String, CliError> {
    let model = cfg.model()?;
    let engine = engine(cfg, model, cfg.n, false);
    let series: Vec<_> = cfg
        .s0
        .iter()
        .map(|&s0| with_engine!(&engine, |p| simulate_with(p, &p.lift(s0), cfg.n)))
        .collect();
    let mut out = String::new();
    let several = series.len() > 1;
    out.push_str(if several {
        "s0,n,balance\n"
    } else {
        "n,balance\n"
    });
    for ts in &series {
        for (n, &x) in ts.values.iter().enumerate() {
            if several {
                let _ = write!(out, "{},", fmt_sig17(ts.s0));
            }
            let _ = writeln!(out, "{n},{}", fmt_sig17(x));
        }
    }
    Ok(out)
}

pub fn classify_budget(cfg: &RunConfig) -> ClassifyBudget {
    ClassifyBudget {
        cycle: CycleOptions {
            max_iter: cfg.cycle_max_iter(),
            max_period: cfg.max_period,
            tol: cfg.cycle_tol(),
        },
        burn_in: cfg.burn_in,
        samples: cfg.samples,
        resolution: cfg.resolution,
        ..ClassifyBudget::default()
    }
}

fn classify_with(cfg: &RunConfig, model: &Model) -> Result<(Verdict, Precision), CliError> {
    let budget = classify_budget(cfg);
    if budget.cycle.max_iter == 0 || budget.samples == 0 {
        return Err(CliError::Config(
            "classification budget must be positive".into(),
        ));
    }
    let horizon = budget.cycle.max_iter.max(budget.burn_in + budget.samples);
    let engine = engine(cfg, model, horizon, model.chaotic().is_some());
    let verdict = with_engine!(&engine, |p| classify_dichotomy(p, &budget));
    Ok((verdict, engine.precision()))
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<String, CliError> {
    let model = cfg.model()?;
    let (verdict, precision) = classify_with(cfg, model)?;
    let mut record = json!({
        "verdict": verdict.name(),
        "periods": verdict.periods(),
        "params": model.params(),
        "precision": precision,
    });
    match &verdict {
        Verdict::Periodic { cycles } => record["cycles"] = json!(cycles),
        Verdict::CantorLike { evidence } => record["evidence"] = json!(evidence),
        Verdict::Inconclusive { reason } => record["reason"] = json!(reason),
    }
    Ok(to_json(&record))
}

fn to_json(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn cmd_freq(cfg: &RunConfig) -> Result<String, CliError> {
    let model = cfg.model()?;
    let interval = cfg
        .interval
        .ok_or_else(|| CliError::Config("freq needs an interval: --J lo,hi".into()))?;
    let engine = engine(cfg, model, cfg.window, false);
    let prediction = match model.chaotic() {
        Some(c) => {
            let gs = GapSystem::golden(c.b, prediction_order(c.b))
                .map_err(|e| CliError::Config(e.to_string()))?;
            Some(predict_frequency(&gs, c, interval))
        }
        None => None,
    };
    let mut out = String::from("s0,count,N,freq,predicted,prediction_error\n");
    for &s0 in &cfg.s0 {
        let f = with_engine!(&engine, |p| visit_frequency(
            p,
            &p.lift(s0),
            interval,
            cfg.window
        ));
        let (pred, err) = match prediction {
            Some(p) => (fmt_sig17(p.predicted), fmt_sig17(p.truncation_error)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{pred},{err}",
            fmt_sig17(s0),
            f.count,
            f.n,
            fmt_sig17(f.freq)
        );
    }
    Ok(out)
}

fn require_chaotic<'a>(model: &'a Model, what: &str) -> Result<&'a ChaoticConfig, CliError> {
    model
        .chaotic()
        .ok_or_else(|| CliError::Config(format!("{what} needs the chaotic family: --chaotic-b")))
}

pub fn cmd_sensitivity(cfg: &RunConfig) -> Result<String, CliError> {
    let c = require_chaotic(cfg.model()?, "sensitivity")?;
    let mut out = String::from(
        "s0,epsilon,eta,found,witness_s0prime,witness_k,achieved_separation,precision\n",
    );
    let max_iter = cfg.sensitivity_max_iter();
    for &s0 in &cfg.s0 {
        let rep = match (cfg.precision, cfg.bits) {
            (PrecisionMode::Double, _) => sensitivity_probe_with(
                &c.double_process(),
                s0,
                cfg.epsilon,
                c.eta(),
                max_iter,
                Precision::Double,
            ),
            (_, Some(bits)) => sensitivity_probe_with(
                &c.wide_process(bits),
                s0,
                cfg.epsilon,
                c.eta(),
                max_iter,
                Precision::Extended { bits },
            ),
            (_, None) => sensitivity_probe(c, s0, cfg.epsilon, max_iter),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_sig17(rep.s0),
            fmt_sig17(rep.epsilon),
            fmt_sig17(rep.eta),
            rep.found,
            if rep.found {
                fmt_sig17(rep.witness_s0prime)
            } else {
                String::new()
            },
            rep.witness_k,
            fmt_sig17(rep.achieved_separation),
            rep.precision
        );
    }
    Ok(out)
}

pub fn cmd_chaotic_params(cfg: &RunConfig) -> Result<String, CliError> {
    let c = require_chaotic(cfg.model()?, "chaotic-params")?;
    let (k_lo, k_hi) = c.invariant_interval();
    let (g_lo, g_hi) = c.excluded_gap();
    Ok(to_json(&json!({
        "b": c.b,
        "r": c.r(),
        "v1": c.params().v1,
        "v2": c.params().v2,
        "delta": c.delta,
        "rho": c.rho,
        "truncation_order": c.truncation_order,
        "truncation_bound": c.truncation_bound,
        "invariant_interval": [k_lo, k_hi],
        "excluded_gap": [g_lo, g_hi],
        "eta": c.eta(),
        "breakpoint": c.normalized_map().breakpoint,
    })))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let cells = cfg.sweep.cells()?;
    let rows: Vec<Result<(ProcessParams, Verdict), CliError>> = cells
        .par_iter()
        .map(|&p| classify_with(cfg, &Model::Explicit(p)).map(|(v, _)| (p, v)))
        .collect();
    let mut out = String::from("r,v1,v2,rho,verdict,total_period\n");
    for row in rows {
        let (p, v) = row?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_sig17(p.r),
            fmt_sig17(p.v1),
            fmt_sig17(p.v2),
            fmt_sig17(p.rho),
            v.name(),
            v.total_period()
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_round_trips() {
        for x in [
            0.013438448418484733,
            0.0,
            1.0,
            -0.5,
            1709.8034428612914,
            4000.0 / 3.0,
            0.1,
            1e-7,
            123456789.123,
            99999.99999999999,
            1e20,
        ] {
            let s = fmt_sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_sig17(1500.0), "1500.0000000000000");
        assert_eq!(fmt_sig17(0.0), "0.0000000000000000");
    }

    #[test]
    fn prediction_order_reaches_target() {
        assert_eq!(prediction_order(2.0), 50);
        assert!(2f64.powi(-(prediction_order(2.0) as i32)) <= 1e-15);
    }
}
