//! Sequential e-values for comparing probability forecasts of binary events.
//!
//! ```
//! use eforecast::{grow_pair, ScoringRule};
//!
//! // p = 0.2 against q = 0.6 under the Brier score, alternative π₁ = 0.6
//! let e = grow_pair(&ScoringRule::Brier, 0.2, 0.6, 0.6).unwrap();
//! assert!((e.e0 - 2.0 / 3.0).abs() < 1e-12);
//! assert!((e.e1 - 1.5).abs() < 1e-12);
//! ```

pub mod baselines;
pub mod error;
pub mod evalue;
pub mod io;
pub mod quadrature;
pub mod scoring;
pub mod sequential;
pub mod sim;

pub use error::{Error, Result};
pub use evalue::{
    all_scores_pair, e_lambda, grow_all_scores, grow_evalue, grow_lambda, grow_pair, AlternativeSpec, EValueStrategy,
    OnePeriodEValue, Target,
};
pub use io::{grade_evidence, EvidenceGrade, RunConfig, TestReport};
pub use scoring::{kappa, null_interval, score, score_diff, Outcome, ScoringRule};
pub use sequential::{run_sequential, EProcess, ForecastRecord, MixtureEProcess, RunOptions, StopDecision};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/scoring.md")]
    pub struct Scoring;
    #[doc = include_str!("../../../book/src/evalues.md")]
    pub struct EValues;
    #[doc = include_str!("../../../book/src/sequential.md")]
    pub struct Sequential;
    #[doc = include_str!("../../../book/src/baselines.md")]
    pub struct Baselines;
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub struct Simulation;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
