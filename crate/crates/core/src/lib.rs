//! Simulation and analysis of a piecewise-linear savings process with a
//! deposit rule that switches at a balance threshold.
//!
//! The map `S -> (1 + r) S + v(S)` with a negative rate is a contraction
//! with one discontinuity; its limit sets are either finitely many cycles
//! or a Cantor set on which the dynamics is semiconjugate to a circle
//! rotation. The modules cover:
//!
//! - [`words`]: the Fibonacci word and rotation codings;
//! - [`process`]: the map, its closed form, and the chaotic parameter family;
//! - [`semiconjugacy`]: the gap construction of the semiconjugacy and
//!   frequency predictions;
//! - [`analysis`]: cycle detection, the periodic/Cantor classifier,
//!   sensitivity probes and visit frequencies;
//! - [`cli`]: the command-line front end.

pub mod analysis;
pub mod cli;
pub mod numeric;
pub mod process;
pub mod semiconjugacy;
pub mod words;

pub use analysis::{
    classify_dichotomy, detect_cycle, omega_limit_approx, sensitivity_probe, visit_frequency,
    CycleReport, CycleStatus, FrequencyReport, OmegaApprox, SensitivityReport, Verdict,
};
pub use numeric::{Precision, Real, Wide};
pub use process::{
    chaotic_params, ChaoticConfig, Process, ProcessError, ProcessParams, TimeSeries,
};
pub use semiconjugacy::{build_gap_system, GapSystem};
pub use words::{fibonacci_word, BinaryWord, RotationParams};
