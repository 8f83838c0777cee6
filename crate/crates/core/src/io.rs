//! Stream ingestion, run configuration and reports.
//!
//! # Input format
//!
//! A CSV file with a header and the columns `t` (integer), `y` (0/1), `p` and
//! `q` (probabilities in (0, 1)), plus an optional condition column (0/1,
//! default name `c`, default value 1). Row `t` carries the outcome `Y_t` and
//! the forecasts of it issued at `t - h`. Times must be strictly increasing
//! and contiguous.
//!
//! # Config format
//!
//! One `key = value` pair per line. Blank lines and lines starting with `#`
//! are ignored and a `#` after a value starts a comment. Keys are the long
//! CLI flag names without dashes, with `-` and `_` interchangeable:
//!
//! ```text
//! # compare two forecasters under the log score
//! mode = evaluate
//! input = data/forecasts.csv
//! rule = log
//! lag = 2
//! alt = mixture
//! xi = 0.5
//! baselines = t_test, dm_test
//! ```
//!
//! Flags given on the command line override values from the file.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::baselines::{BaselineTest, ScoreDiffSeries};
use crate::error::{Error, Result};
use crate::evalue::{AlternativeSpec, EValueStrategy, OnePeriodEValue, Target};
use crate::scoring::{score_diff, Outcome, ScoringRule};
use crate::sequential::{run_sequential, ForecastRecord, MixtureEProcess, RunOptions, StepRecord};
use crate::sim::{self, Design, Method, StudyRow};

/// The discrete evidence scale for e-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EvidenceGrade {
    No,
    Poor,
    Substantial,
    Strong,
    VeryStrong,
    Decisive,
}

impl fmt::Display for EvidenceGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvidenceGrade::No => "no",
            EvidenceGrade::Poor => "poor",
            EvidenceGrade::Substantial => "substantial",
            EvidenceGrade::Strong => "strong",
            EvidenceGrade::VeryStrong => "very strong",
            EvidenceGrade::Decisive => "decisive",
        })
    }
}

/// Upper bucket boundaries; each boundary belongs to the lower bucket.
pub const GRADE_BOUNDARIES: [f64; 5] = [1.0, 3.16, 10.0, 31.6, 100.0];

/// Evidence grade of an e-value. `e = 0` is graded "no".
pub fn grade_evidence(e: f64) -> EvidenceGrade {
    const GRADES: [EvidenceGrade; 6] = [
        EvidenceGrade::No,
        EvidenceGrade::Poor,
        EvidenceGrade::Substantial,
        EvidenceGrade::Strong,
        EvidenceGrade::VeryStrong,
        EvidenceGrade::Decisive,
    ];
    let i = GRADE_BOUNDARIES.iter().take_while(|&&b| e > b).count();
    GRADES[i]
}

/// Decimal with 6 significant digits; values above 100 are printed in full.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() || x == 0.0 || x.abs() > 100.0 {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if mag < -4 {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One input row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputRow {
    pub t: i64,
    pub y: Outcome,
    pub p: f64,
    pub q: f64,
    pub c: bool,
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_err(row: usize, column: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        row,
        column: column.to_string(),
        reason: reason.into(),
    }
}

/// Reads input rows. Row numbers in errors count data rows from 1.
pub fn parse_input_reader<R: Read>(reader: R, condition_column: Option<&str>) -> Result<Vec<InputRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let it = column(&headers, "t")?;
    let iy = column(&headers, "y")?;
    let ip = column(&headers, "p")?;
    let iq = column(&headers, "q")?;
    let ic = match condition_column {
        Some(name) => Some(column(&headers, name)?),
        None => column(&headers, "c").ok(),
    };
    let c_name = condition_column.unwrap_or("c");

    let mut rows: Vec<InputRow> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let field = |idx: usize| rec.get(idx).unwrap_or("");
        let t: i64 = field(it).parse().map_err(|_| parse_err(row, "t", format!("not an integer: {:?}", field(it))))?;
        let flag = |idx: usize, name: &str| -> Result<bool> {
            match field(idx) {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(parse_err(row, name, format!("expected 0 or 1, got {other:?}"))),
            }
        };
        let y = Outcome::from(flag(iy, "y")?);
        let prob = |idx: usize, name: &str| -> Result<f64> {
            let v: f64 = field(idx)
                .parse()
                .map_err(|_| parse_err(row, name, format!("not a number: {:?}", field(idx))))?;
            if v > 0.0 && v < 1.0 {
                Ok(v)
            } else {
                Err(parse_err(row, name, format!("probability {v} outside (0, 1)")))
            }
        };
        let p = prob(ip, "p")?;
        let q = prob(iq, "q")?;
        let c = match ic {
            Some(idx) => flag(idx, c_name)?,
            None => true,
        };
        if let Some(prev) = rows.last() {
            if t != prev.t + 1 {
                return Err(Error::Ordering {
                    expected: prev.t + 1,
                    got: t,
                });
            }
        }
        rows.push(InputRow { t, y, p, q, c });
    }
    Ok(rows)
}

pub fn parse_input(path: &Path, condition_column: Option<&str>) -> Result<Vec<InputRow>> {
    parse_input_reader(File::open(path)?, condition_column)
}

/// Converts rows in outcome-time layout to forecast records indexed by issue
/// time `t - h`.
pub fn to_records(rows: &[InputRow], lag: usize) -> Vec<ForecastRecord> {
    rows.iter()
        .map(|r| ForecastRecord::new(r.t - lag as i64, r.p, r.q, r.c, Some(r.y)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Evaluate,
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stopping {
    None,
    StopAtAlpha,
}

/// How the alternative is specified on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AltChoiceConfig {
    /// `η = q`.
    Competitor,
    /// `η = ξ (p + q)/2 + (1 - ξ) q` with the configured ξ.
    Mixture,
    /// Equispaced mixture of `k` e-processes.
    KMixture,
    /// A constant η.
    Fixed(f64),
}

/// Settings for `evaluate` and `simulate`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub rule: ScoringRule,
    pub lag: usize,
    pub alt: AltChoiceConfig,
    pub xi: f64,
    pub k: usize,
    pub alpha: f64,
    pub all_scores: bool,
    pub condition_column: Option<String>,
    pub condition_threshold: Option<f64>,
    pub stopping: Stopping,
    pub baselines: Vec<BaselineTest>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    // simulate
    pub design: String,
    pub replications: u64,
    pub mus: Vec<f64>,
    pub thetas: Vec<f64>,
    pub horizons: Vec<usize>,
    pub lags: Vec<usize>,
    pub alphas: Vec<f64>,
    pub methods: Vec<Method>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Evaluate,
            rule: ScoringRule::Brier,
            lag: 1,
            alt: AltChoiceConfig::Competitor,
            xi: 0.5,
            k: 1,
            alpha: 0.05,
            all_scores: false,
            condition_column: None,
            condition_threshold: None,
            stopping: Stopping::None,
            baselines: Vec::new(),
            input: None,
            output: None,
            seed: 1,
            design: "uniform".into(),
            replications: 1000,
            mus: (0..=10).map(|i| i as f64 / 10.0).collect(),
            thetas: vec![0.25, 0.5, 0.75, 1.0],
            horizons: vec![600],
            lags: vec![1, 2, 3],
            alphas: Vec::new(),
            methods: Vec::new(),
        }
    }
}

fn bad(key: &str, value: &str, why: impl fmt::Display) -> Error {
    Error::Config {
        line: 0,
        reason: format!("{key} = {value:?}: {why}"),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| bad(key, value, e)))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(bad(key, value, "expected a boolean")),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

pub fn parse_baseline(s: &str) -> Result<BaselineTest> {
    match s.trim() {
        "t" | "t_test" => Ok(BaselineTest::TTest),
        "wilcoxon" => Ok(BaselineTest::Wilcoxon),
        "dm" | "dm_test" => Ok(BaselineTest::DieboldMariano { bandwidth: None }),
        other => Err(Error::Parameter {
            name: "baselines",
            reason: format!("unknown test {other:?}"),
        }),
    }
}

impl RunConfig {
    /// Sets one option by its key, as used in config files and CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "mode" => {
                self.mode = match value {
                    "evaluate" => Mode::Evaluate,
                    "simulate" => Mode::Simulate,
                    _ => return Err(bad(k, value, "expected evaluate or simulate")),
                }
            }
            "rule" => self.rule = parse_value(k, value)?,
            "lag" => self.lag = parse_value(k, value)?,
            "alt" => {
                self.alt = match value {
                    "q" | "competitor" => AltChoiceConfig::Competitor,
                    "mixture" => AltChoiceConfig::Mixture,
                    "kmix" | "k_mixture" => AltChoiceConfig::KMixture,
                    other => {
                        let v = parse_value(k, other)?;
                        AlternativeSpec::fixed(v).map_err(|e| bad(k, value, e))?;
                        AltChoiceConfig::Fixed(v)
                    }
                }
            }
            "xi" => self.xi = parse_value(k, value)?,
            "k" => self.k = parse_value(k, value)?,
            "alpha" => self.alpha = parse_value(k, value)?,
            "all_scores" => self.all_scores = parse_bool(k, value)?,
            "condition_column" => self.condition_column = Some(value.to_string()),
            "condition_threshold" => self.condition_threshold = Some(parse_value(k, value)?),
            "stop" => {
                self.stopping = match value {
                    "none" => Stopping::None,
                    "alpha" | "stop_at_alpha" => Stopping::StopAtAlpha,
                    _ => return Err(bad(k, value, "expected none or alpha")),
                }
            }
            "baselines" => {
                self.baselines = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty() && *s != "none")
                    .map(parse_baseline)
                    .collect::<Result<_>>()
                    .map_err(|e| bad(k, value, e))?
            }
            "input" => self.input = Some(PathBuf::from(value)),
            "output" => self.output = Some(PathBuf::from(value)),
            "seed" => self.seed = parse_value(k, value)?,
            "design" => self.design = value.to_string(),
            "replications" => self.replications = parse_value(k, value)?,
            "mu" => self.mus = parse_list(k, value)?,
            "theta" | "theta_ma" => self.thetas = parse_list(k, value)?,
            "horizon" | "horizons" => self.horizons = parse_list(k, value)?,
            "lags" => self.lags = parse_list(k, value)?,
            "alphas" => self.alphas = parse_list(k, value)?,
            "methods" => self.methods = parse_list(k, value)?,
            _ => {
                return Err(Error::Config {
                    line: 0,
                    reason: format!("unknown key {key:?}"),
                })
            }
        }
        Ok(())
    }

    /// Applies a config file; see the module docs for the grammar.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let with_line = |e: Error| match e {
                Error::Config { reason, .. } => Error::Config { line: i + 1, reason },
                other => Error::Config {
                    line: i + 1,
                    reason: other.to_string(),
                },
            };
            let (key, value) = line.split_once('=').ok_or(Error::Config {
                line: i + 1,
                reason: "expected key = value".into(),
            })?;
            self.set(key, value).map_err(with_line)?;
        }
        Ok(())
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_config_text(&std::fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag < 1 {
            return Err(Error::Parameter {
                name: "lag",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter {
                name: "alpha",
                reason: format!("{} not in (0, 1)", self.alpha),
            });
        }
        if let Some(c) = self.condition_threshold {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::Parameter {
                    name: "condition_threshold",
                    reason: format!("{c} not in [0, 1]"),
                });
            }
        }
        if self.mode == Mode::Evaluate && self.input.is_none() {
            return Err(Error::Parameter {
                name: "input",
                reason: "evaluate mode requires an input file".into(),
            });
        }
        Ok(())
    }

    pub fn alternative(&self) -> Result<AlternativeSpec> {
        match self.alt {
            AltChoiceConfig::Competitor => Ok(AlternativeSpec::competitor()),
            AltChoiceConfig::Mixture => AlternativeSpec::convex_mixture(self.xi),
            AltChoiceConfig::KMixture => AlternativeSpec::equispaced(self.k),
            AltChoiceConfig::Fixed(v) => AlternativeSpec::fixed(v),
        }
    }

    pub fn strategy(&self) -> Result<EValueStrategy> {
        let target = if self.all_scores {
            Target::AllScores
        } else {
            Target::Score(self.rule.clone())
        };
        Ok(EValueStrategy::new(target, self.alternative()?))
    }
}

/// A baseline p-value or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub name: &'static str,
    pub p_value: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub final_e: f64,
    pub anytime_p: f64,
    /// Outcome time at which the stopping rule fired.
    pub stop_time: Option<i64>,
    pub stopped: bool,
    pub e_path: Vec<f64>,
    pub evidence_grade: EvidenceGrade,
    pub lag: usize,
    pub n_rows: usize,
    pub n_conditioned: usize,
    pub baselines: Vec<BaselineResult>,
    pub steps: Vec<StepRecord>,
}

/// Evaluates already-parsed rows under `cfg` (the input path is not used).
pub fn evaluate_rows(rows: &[InputRow], cfg: &RunConfig) -> Result<TestReport> {
    let h = cfg.lag;
    let mut rows = rows.to_vec();
    if let Some(thr) = cfg.condition_threshold {
        for r in &mut rows {
            r.c = r.c && r.p.max(r.q) >= thr;
        }
    }
    let records = to_records(&rows, h);
    let strategy = cfg.strategy()?;
    let opts = RunOptions {
        lag: h,
        alpha: Some(cfg.alpha),
        stop_on_trigger: cfg.stopping == Stopping::StopAtAlpha,
    };
    let run = run_sequential(&records, &strategy, opts)?;

    let diffs = records
        .iter()
        .filter(|r| r.c)
        .map(|r| score_diff(&cfg.rule, r.p, r.q, r.y_future.expect("input rows carry outcomes")))
        .collect::<Result<Vec<_>>>()?;
    let n_conditioned = diffs.len();
    let series = ScoreDiffSeries::new(diffs, h);
    let baselines = cfg
        .baselines
        .iter()
        .map(|test| BaselineResult {
            name: test.name(),
            p_value: match &series {
                Ok(s) => test.p_value(s).map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            },
        })
        .collect();

    let e_path = run.steps.iter().map(|s| s.e).collect();
    Ok(TestReport {
        final_e: run.final_e,
        anytime_p: run.p_anytime,
        stop_time: run.trigger_time,
        stopped: run.stopped,
        e_path,
        evidence_grade: grade_evidence(run.final_e),
        lag: h,
        n_rows: rows.len(),
        n_conditioned,
        baselines,
        steps: run.steps,
    })
}

pub fn run_evaluate(cfg: &RunConfig) -> Result<TestReport> {
    cfg.validate()?;
    let input = cfg.input.as_deref().expect("validated");
    let rows = parse_input(input, cfg.condition_column.as_deref())?;
    evaluate_rows(&rows, cfg)
}

fn step_header(k: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "y".to_string()];
    if k == 1 {
        h.extend(["e0", "e1", "lambda"].map(String::from));
    } else {
        for j in 1..=k {
            h.extend([format!("e0_{j}"), format!("e1_{j}"), format!("lambda_{j}")]);
        }
    }
    h.extend(["e_t", "anytime_p"].map(String::from));
    h
}

/// Writes the per-step table. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_steps_csv<W: Write>(steps: &[StepRecord], out: W) -> Result<()> {
    let k = steps.first().map_or(1, |s| s.pairs.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(step_header(k))?;
    for s in steps {
        let mut rec = vec![s.t.to_string(), s.y.as_u8().to_string()];
        for p in &s.pairs {
            rec.extend([p.e0.to_string(), p.e1.to_string(), p.lambda.to_string()]);
        }
        rec.extend([s.e.to_string(), s.p_anytime.to_string()]);
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a per-step table back.
pub fn read_steps_csv<R: Read>(reader: R) -> Result<Vec<StepRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let k = headers.iter().filter(|h| h.starts_with("e0")).count().max(1);
    if headers.iter().collect::<Vec<_>>() != step_header(k) {
        return Err(Error::Parse {
            row: 0,
            column: "header".into(),
            reason: format!("expected {}", step_header(k).join(",")),
        });
    }
    let mut steps = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |idx: usize| -> Result<f64> {
            rec[idx]
                .parse()
                .map_err(|_| parse_err(i + 1, &headers[idx], format!("not a number: {:?}", &rec[idx])))
        };
        let t = rec[0].parse().map_err(|_| parse_err(i + 1, "t", "not an integer"))?;
        let y = match &rec[1] {
            "0" => Outcome::Zero,
            "1" => Outcome::One,
            _ => return Err(parse_err(i + 1, "y", "expected 0 or 1")),
        };
        let pairs = (0..k)
            .map(|j| {
                Ok(OnePeriodEValue {
                    e0: num(2 + 3 * j)?,
                    e1: num(3 + 3 * j)?,
                    lambda: num(4 + 3 * j)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        steps.push(StepRecord {
            t,
            y,
            pairs,
            e: num(2 + 3 * k)?,
            p_anytime: num(3 + 3 * k)?,
        });
    }
    Ok(steps)
}

/// Recomputes the final e-value from per-step frozen e-values and outcomes.
pub fn reduce_steps(steps: &[StepRecord], lag: usize) -> Result<f64> {
    let k = steps.first().map_or(1, |s| s.pairs.len());
    let mut proc = MixtureEProcess::new(lag, k)?;
    for (i, s) in steps.iter().enumerate() {
        if i >= lag {
            proc.observe(steps[i - lag].y)?;
        }
        proc.commit(s.t - lag as i64, &s.pairs)?;
    }
    for s in &steps[steps.len().saturating_sub(lag)..] {
        proc.observe(s.y)?;
    }
    Ok(proc.e_current())
}

/// Human-readable summary of a report.
pub fn format_summary(report: &TestReport) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<14}{v}\n"));
    line("rows", report.n_rows.to_string());
    line("conditioned", report.n_conditioned.to_string());
    line("lag", report.lag.to_string());
    line("final e", format_number(report.final_e));
    line("evidence", report.evidence_grade.to_string());
    line("anytime p", format_number(report.anytime_p));
    line(
        "stop time",
        match report.stop_time {
            Some(t) if report.stopped => format!("{t} (stopped)"),
            Some(t) => t.to_string(),
            None => "none".into(),
        },
    );
    for b in &report.baselines {
        line(
            &format!("p {}", b.name),
            match &b.p_value {
                Ok(p) => format_number(*p),
                Err(e) => format!("n/a ({e})"),
            },
        );
    }
    s
}

/// Runs the configured simulation grid.
pub fn run_simulate(cfg: &RunConfig) -> Result<Vec<StudyRow>> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::Parameter {
            name: "alpha",
            reason: format!("{} not in (0, 1)", cfg.alpha),
        });
    }
    let alphas = if cfg.alphas.is_empty() { vec![cfg.alpha] } else { cfg.alphas.clone() };
    let (designs, default_methods): (Vec<Design>, Vec<Method>) = match cfg.design.as_str() {
        "uniform" => {
            let mut designs = Vec::new();
            for &horizon in &cfg.horizons {
                for &alpha in &alphas {
                    for &mu in &cfg.mus {
                        designs.push(Design::Uniform(sim::UniformPartialInfoDesign {
                            mu,
                            horizon,
                            rule: cfg.rule.clone(),
                            alpha,
                            seed: cfg.seed,
                        }));
                    }
                }
            }
            (designs, vec![Method::EStopped(sim::AltChoice::KMixture(1)), Method::TTest])
        }
        "ma4" => {
            let mut designs = Vec::new();
            for &alpha in &alphas {
                designs.extend(sim::ma4_grid(&cfg.rule, &cfg.thetas, &cfg.horizons, &cfg.lags, alpha, cfg.seed));
            }
            (designs, vec![Method::EStopped(sim::AltChoice::Competitor), Method::DmTest])
        }
        other => {
            return Err(Error::Parameter {
                name: "design",
                reason: format!("unknown design {other:?} (expected uniform or ma4)"),
            })
        }
    };
    let methods = if cfg.methods.is_empty() { default_methods } else { cfg.methods.clone() };
    sim::run_rejection_study(&designs, &methods, cfg.replications)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grades() {
        assert_eq!(grade_evidence(0.9), EvidenceGrade::No);
        assert_eq!(grade_evidence(0.0), EvidenceGrade::No);
        assert_eq!(grade_evidence(1.0), EvidenceGrade::No);
        assert_eq!(grade_evidence(1.5), EvidenceGrade::Poor);
        assert_eq!(grade_evidence(3.16), EvidenceGrade::Poor);
        assert_eq!(grade_evidence(10.0), EvidenceGrade::Substantial);
        assert_eq!(grade_evidence(31.6), EvidenceGrade::Strong);
        assert_eq!(grade_evidence(100.0), EvidenceGrade::VeryStrong);
        assert_eq!(grade_evidence(150.0), EvidenceGrade::Decisive);
        assert_eq!(grade_evidence(f64::INFINITY), EvidenceGrade::Decisive);
        assert_eq!(EvidenceGrade::VeryStrong.to_string(), "very strong");
    }

    proptest! {
        #[test]
        fn grades_are_monotone(a in 0.0f64..1e4, b in 0.0f64..1e4) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(grade_evidence(lo) <= grade_evidence(hi));
        }
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(2.25), "2.25000");
        assert_eq!(format_number(0.0512345678), "0.0512346");
        assert_eq!(format_number(12345.678901), "12345.678901");
        assert_eq!(format_number(100.0), "100.000");
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn parse_basic_row() {
        let rows = parse_input_reader("t,y,p,q\n1,0,0.2,0.6\n".as_bytes(), None).unwrap();
        assert_eq!(
            rows,
            vec![InputRow {
                t: 1,
                y: Outcome::Zero,
                p: 0.2,
                q: 0.6,
                c: true
            }]
        );
    }

    #[test]
    fn parse_errors() {
        let e = parse_input_reader("t,y,p,q\n1,0,0.2,0.6\n2,1,1.0,0.5\n".as_bytes(), None).unwrap_err();
        match e {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "p");
            }
            other => panic!("{other:?}"),
        }
        let e = parse_input_reader("t,y,p,q\n1,0,0.2,0.6\n1,1,0.3,0.5\n".as_bytes(), None).unwrap_err();
        assert!(matches!(e, Error::Ordering { .. }));
        let e = parse_input_reader("t,y,p\n1,0,0.2\n".as_bytes(), None).unwrap_err();
        assert!(matches!(e, Error::MissingColumn(c) if c == "q"));
        let e = parse_input_reader("t,y,p,q\n1,2,0.2,0.6\n".as_bytes(), None).unwrap_err();
        assert!(matches!(e, Error::Parse { row: 1, .. }));
        assert!(e.is_input_error());
    }

    #[test]
    fn condition_column_by_name() {
        let text = "t,y,p,q,flag\n1,0,0.2,0.6,0\n2,1,0.3,0.5,1\n";
        let rows = parse_input_reader(text.as_bytes(), Some("flag")).unwrap();
        assert_eq!(rows.iter().map(|r| r.c).collect::<Vec<_>>(), vec![false, true]);
        assert!(parse_input_reader(text.as_bytes(), Some("cc")).is_err());
    }

    fn eval_cfg() -> RunConfig {
        RunConfig {
            input: Some("unused.csv".into()),
            ..RunConfig::default()
        }
    }

    #[test]
    fn all_unconditioned_is_no_evidence() {
        let text = "t,y,p,q,c\n1,0,0.2,0.6,0\n2,1,0.3,0.5,0\n3,1,0.7,0.5,0\n";
        let rows = parse_input_reader(text.as_bytes(), None).unwrap();
        let mut cfg = eval_cfg();
        cfg.baselines = vec![BaselineTest::TTest];
        let r = evaluate_rows(&rows, &cfg).unwrap();
        assert_eq!(r.final_e, 1.0);
        assert_eq!(r.evidence_grade, EvidenceGrade::No);
        assert!(r.baselines[0].p_value.is_err());
    }

    #[test]
    fn condition_threshold_uses_max() {
        let text = "t,y,p,q\n1,0,0.2,0.6\n2,0,0.2,0.4\n";
        let rows = parse_input_reader(text.as_bytes(), None).unwrap();
        let mut cfg = eval_cfg();
        cfg.condition_threshold = Some(0.5);
        let r = evaluate_rows(&rows, &cfg).unwrap();
        assert_eq!(r.n_conditioned, 1);
        assert!(r.steps[1].pairs[0].is_neutral());
        assert!(!r.steps[0].pairs[0].is_neutral());
    }

    #[test]
    fn all_scores_competitor_is_likelihood_ratio() {
        let text = "t,y,p,q\n1,0,0.2,0.6\n2,1,0.7,0.4\n";
        let rows = parse_input_reader(text.as_bytes(), None).unwrap();
        let mut cfg = eval_cfg();
        cfg.all_scores = true;
        let r = evaluate_rows(&rows, &cfg).unwrap();
        let s0 = r.steps[0].pairs[0];
        assert!((s0.e0 - 0.4 / 0.8).abs() < 1e-15 && (s0.e1 - 0.6 / 0.2).abs() < 1e-14);
        let s1 = r.steps[1].pairs[0];
        assert!((s1.e0 - 0.6 / 0.3).abs() < 1e-14 && (s1.e1 - 0.4 / 0.7).abs() < 1e-15);
        let expected = (0.4 / 0.8) * (0.4 / 0.7);
        assert!((r.final_e - expected).abs() < 1e-14);
    }

    #[test]
    fn steps_round_trip() {
        let mut text = String::from("t,y,p,q\n");
        for t in 1..=40 {
            let p = 0.1 + 0.8 * ((t * 37 % 17) as f64 / 17.0);
            let q = 0.15 + 0.7 * ((t * 11 % 13) as f64 / 13.0);
            text.push_str(&format!("{t},{},{p},{q}\n", (t * 7 % 3 == 0) as u8));
        }
        let rows = parse_input_reader(text.as_bytes(), None).unwrap();
        for (lag, alt) in [(1, AltChoiceConfig::Competitor), (3, AltChoiceConfig::KMixture), (2, AltChoiceConfig::Mixture)] {
            let mut cfg = eval_cfg();
            cfg.lag = lag;
            cfg.alt = alt;
            cfg.k = 3;
            cfg.rule = ScoringRule::Spherical;
            let r = evaluate_rows(&rows, &cfg).unwrap();
            let mut buf = Vec::new();
            write_steps_csv(&r.steps, &mut buf).unwrap();
            let back = read_steps_csv(buf.as_slice()).unwrap();
            assert_eq!(back, r.steps);
            let e = reduce_steps(&back, lag).unwrap();
            assert!((e - r.final_e).abs() <= 1e-9 * r.final_e.max(1.0), "{e} vs {}", r.final_e);
        }
    }

    #[test]
    fn config_text() {
        let mut cfg = RunConfig::default();
        cfg.apply_config_text(
            "# comment\nmode = simulate\n\nrule = log  # trailing\nlag=2\nalt = mixture\nxi = 0.25\nbaselines = t_test, dm\nmu = 0.5, 0.7\n",
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Simulate);
        assert!(matches!(cfg.rule, ScoringRule::Logarithmic));
        assert_eq!(cfg.lag, 2);
        assert_eq!(cfg.alt, AltChoiceConfig::Mixture);
        assert_eq!(cfg.xi, 0.25);
        assert_eq!(cfg.baselines.len(), 2);
        assert_eq!(cfg.mus, vec![0.5, 0.7]);
        let e = cfg.apply_config_text("lag = 1\nbogus = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let e = cfg.apply_config_text("lag\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }));
        let e = cfg.apply_config_text("lag = two\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }));
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_err());
        cfg.input = Some("x.csv".into());
        cfg.validate().unwrap();
        cfg.alpha = 1.0;
        assert!(cfg.validate().is_err());
        cfg.alpha = 0.05;
        cfg.lag = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn convex_mixture_half_is_quarter_three_quarters() {
        let text = "t,y,p,q\n1,1,0.2,0.6\n";
        let rows = parse_input_reader(text.as_bytes(), None).unwrap();
        let mut cfg = eval_cfg();
        cfg.alt = AltChoiceConfig::Mixture;
        cfg.xi = 0.5;
        let r = evaluate_rows(&rows, &cfg).unwrap();
        let eta: f64 = 0.25 * 0.2 + 0.75 * 0.6;
        // Brier, κ = 0.4: GROW e-value at y = 1 is η/κ
        assert!((r.steps[0].pairs[0].e1 - eta / 0.4).abs() < 1e-12);
    }
}
