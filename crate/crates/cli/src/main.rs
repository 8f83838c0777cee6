use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eforecast::io::{self as eio, format_number, format_summary, Mode, RunConfig, TestReport};
use eforecast::Error;
use serde_json::json;

/// Sequential e-value comparison of binary-event probability forecasts.
#[derive(Parser)]
#[command(name = "eforecast", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether forecast p dominates forecast q on a data file.
    Evaluate(EvaluateArgs),
    /// Run a Monte Carlo rejection-rate study.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    /// Flat key = value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV with columns t, y, p, q and optionally c.
    #[arg(long)]
    input: Option<String>,
    /// brier, log, spherical or elementary:<theta>.
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    lag: Option<String>,
    /// q, mixture, kmix, or a fixed probability.
    #[arg(long)]
    alt: Option<String>,
    /// Weight of the convex mixture alternative.
    #[arg(long)]
    xi: Option<String>,
    /// Number of mixture components for --alt kmix.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Test dominance under all consistent scoring rules.
    #[arg(long)]
    all_scores: bool,
    /// none or alpha.
    #[arg(long)]
    stop: Option<String>,
    /// Comma-separated list of t_test, wilcoxon, dm_test.
    #[arg(long)]
    baselines: Option<String>,
    /// Name of the condition column.
    #[arg(long)]
    condition_column: Option<String>,
    /// Condition on max(p, q) >= threshold.
    #[arg(long)]
    condition_threshold: Option<String>,
    /// Per-step CSV output (t, y, e0, e1, lambda, e_t, anytime_p).
    #[arg(long)]
    output: Option<String>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// uniform or ma4.
    #[arg(long)]
    design: Option<String>,
    #[arg(long)]
    rule: Option<String>,
    /// Comma-separated μ grid (uniform design).
    #[arg(long)]
    mu: Option<String>,
    /// Comma-separated MA coefficient grid (ma4 design).
    #[arg(long)]
    theta: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long)]
    horizon: Option<String>,
    /// Comma-separated lags (ma4 design).
    #[arg(long)]
    lags: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Comma-separated levels; overrides --alpha.
    #[arg(long)]
    alphas: Option<String>,
    /// Comma-separated methods, e.g. e_stopped(k=1),e_unstopped(pi),t_test,
    /// wilcoxon,dm_test,t_test_optional_stop(3).
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    replications: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    output: Option<String>,
}

fn load(config: &Option<PathBuf>, mode: Mode) -> eforecast::Result<RunConfig> {
    let mut cfg = match config {
        Some(path) => RunConfig::from_config_file(path)?,
        None => RunConfig::default(),
    };
    cfg.mode = mode;
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, flags: &[(&str, &Option<String>)]) -> eforecast::Result<()> {
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(())
}

fn report_json(r: &TestReport) -> serde_json::Value {
    let baselines: serde_json::Map<String, serde_json::Value> = r
        .baselines
        .iter()
        .map(|b| {
            let v = match &b.p_value {
                Ok(p) => json!(p),
                Err(e) => json!({ "error": e }),
            };
            (b.name.to_string(), v)
        })
        .collect();
    json!({
        "final_e": r.final_e,
        "anytime_p": r.anytime_p,
        "stop_time": r.stop_time,
        "stopped": r.stopped,
        "evidence_grade": r.evidence_grade.to_string(),
        "lag": r.lag,
        "rows": r.n_rows,
        "conditioned": r.n_conditioned,
        "baselines": baselines,
    })
}

fn evaluate(args: EvaluateArgs) -> eforecast::Result<()> {
    let mut cfg = load(&args.config, Mode::Evaluate)?;
    apply(
        &mut cfg,
        &[
            ("input", &args.input),
            ("rule", &args.rule),
            ("lag", &args.lag),
            ("alt", &args.alt),
            ("xi", &args.xi),
            ("k", &args.k),
            ("alpha", &args.alpha),
            ("stop", &args.stop),
            ("baselines", &args.baselines),
            ("condition_column", &args.condition_column),
            ("condition_threshold", &args.condition_threshold),
            ("output", &args.output),
        ],
    )?;
    if args.all_scores {
        cfg.all_scores = true;
    }
    let report = eio::run_evaluate(&cfg)?;
    if let Some(path) = &cfg.output {
        eio::write_steps_csv(&report.steps, BufWriter::new(File::create(path)?))?;
    }
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report_json(&report)).expect("serializable"))?;
    } else {
        write!(out, "{}", format_summary(&report))?;
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> eforecast::Result<()> {
    let mut cfg = load(&args.config, Mode::Simulate)?;
    apply(
        &mut cfg,
        &[
            ("design", &args.design),
            ("rule", &args.rule),
            ("mu", &args.mu),
            ("theta", &args.theta),
            ("horizon", &args.horizon),
            ("lags", &args.lags),
            ("alpha", &args.alpha),
            ("alphas", &args.alphas),
            ("methods", &args.methods),
            ("replications", &args.replications),
            ("seed", &args.seed),
            ("output", &args.output),
        ],
    )?;
    let rows = eio::run_simulate(&cfg)?;
    match &cfg.output {
        Some(path) => {
            eforecast::sim::write_study_csv(&rows, BufWriter::new(File::create(path)?))?;
            for r in &rows {
                eprintln!("{} {} -> {}", r.design, r.method, format_number(r.rate));
            }
        }
        None => eforecast::sim::write_study_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(a) => evaluate(a),
        Command::Simulate(a) => simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for malformed input or configuration, 3 for numeric or domain errors.
fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        2
    } else {
        3
    }
}
