//! Monte Carlo designs and rejection-rate studies.
//!
//! Two data-generating designs are provided:
//!
//! * [`UniformPartialInfoDesign`]: `p_t, q_t ~ Unif(0, 1)` independently and
//!   `Y_{t+1} ~ Bernoulli(π_t)` with `π_t` moving from `p_t` (μ = 0) through
//!   the null boundary (μ = 0.5) to `q_t` (μ = 1). For the Brier score this is
//!   `π_t = μ q_t + (1 - μ) p_t`.
//! * [`Ma4Design`]: `Z_t = ε_t + θ Σ_{j=1..4} ε_{t-j}`, `Y_t = 1{Z_t > 0}`,
//!   comparing the ideal lag-`h` forecast `q` with the ideal lag-`h+1`
//!   forecast `p`.
//!
//! # Random numbers
//!
//! Replication `r` of a study with seed `s` draws from ChaCha20 keyed by
//! `ChaCha20Rng::seed_from_u64(s)` on stream `r` (`set_stream(r)`). Within a
//! replication the uniform design draws `p, q, u` per step (in that order,
//! `u < π` giving `Y = 1`), and the MA design draws `T + h + 4` standard normal
//! innovations (ziggurat, `rand_distr::StandardNormal`) starting at time
//! `-3`. Every design in a grid reuses the same streams, so comparisons across
//! designs and methods use common random numbers.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::baselines::{self, BaselineTest, ScoreDiffSeries};
use crate::error::{Error, Result};
use crate::evalue::{AlternativeSpec, EValueStrategy, Target};
use crate::scoring::{kappa, score_diff, Outcome, ScoringRule};
use crate::sequential::{run_sequential, ForecastRecord, RunOptions};

/// The generator for replication `rep` of a study seeded with `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

#[derive(Debug, Clone)]
pub struct UniformPartialInfoDesign {
    pub mu: f64,
    pub horizon: usize,
    pub rule: ScoringRule,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Ma4Design {
    pub theta_ma: f64,
    pub horizon: usize,
    pub lag: usize,
    pub rule: ScoringRule,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub enum Design {
    Uniform(UniformPartialInfoDesign),
    Ma4(Ma4Design),
}

/// A simulated forecast stream with the true event probabilities.
#[derive(Debug, Clone)]
pub struct GeneratedStream {
    pub lag: usize,
    pub records: Vec<ForecastRecord>,
    pub truth: Vec<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "alpha",
            reason: format!("{alpha} not in (0, 1)"),
        })
    }
}

impl UniformPartialInfoDesign {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::Parameter {
                name: "mu",
                reason: format!("{} not in [0, 1]", self.mu),
            });
        }
        if self.horizon < 2 {
            return Err(Error::Parameter {
                name: "horizon",
                reason: "must be at least 2".into(),
            });
        }
        check_alpha(self.alpha)
    }

    /// Event probability for forecasts `p, q`.
    pub fn event_probability(&self, p: f64, q: f64) -> Result<f64> {
        let mu = self.mu;
        if matches!(self.rule, ScoringRule::Brier) {
            return Ok(mu * q + (1.0 - mu) * p);
        }
        if p == q {
            return Ok(p);
        }
        let r = kappa(&self.rule, p.min(q), p.max(q))?;
        Ok(if mu <= 0.5 {
            p + 2.0 * mu * (r - p)
        } else {
            r + (2.0 * mu - 1.0) * (q - r)
        })
    }
}

impl Ma4Design {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.lag) {
            return Err(Error::Parameter {
                name: "lag",
                reason: format!("{} not in 1..=3", self.lag),
            });
        }
        if self.horizon < 2 {
            return Err(Error::Parameter {
                name: "horizon",
                reason: "must be at least 2".into(),
            });
        }
        check_alpha(self.alpha)
    }
}

fn open_unit(rng: &mut ChaCha20Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

pub fn gen_uniform_partial_info(design: &UniformPartialInfoDesign, rep: u64) -> Result<GeneratedStream> {
    design.validate()?;
    let mut rng = replication_rng(design.seed, rep);
    let mut records = Vec::with_capacity(design.horizon);
    let mut truth = Vec::with_capacity(design.horizon);
    for t in 1..=design.horizon {
        let p = open_unit(&mut rng);
        let q = open_unit(&mut rng);
        let u: f64 = rng.random();
        let pi = design.event_probability(p, q)?;
        records.push(ForecastRecord::new(t as i64, p, q, p != q, Some(Outcome::from(u < pi))));
        truth.push(pi);
    }
    Ok(GeneratedStream {
        lag: 1,
        records,
        truth,
    })
}

/// Ideal forecast of `Y_t` issued `lag` steps ahead: with the innovations up
/// to `t - lag` known, `Z_t` is normal with mean `θ Σ_{j=lag..4} ε_{t-j}` and
/// variance `1 + (lag - 1) θ²`.
fn ideal_forecast(normal: &Normal, eps: &[f64], idx: usize, theta: f64, lag: usize) -> f64 {
    let known: f64 = (lag..=4).map(|j| eps[idx - j]).sum();
    let sd = (1.0 + (lag as f64 - 1.0) * theta * theta).sqrt();
    normal.cdf(theta * known / sd)
}

pub fn gen_ma4(design: &Ma4Design, rep: u64) -> Result<GeneratedStream> {
    design.validate()?;
    let (h, n) = (design.lag, design.horizon);
    let theta = design.theta_ma;
    let mut rng = replication_rng(design.seed, rep);
    // eps[i] is the innovation at time i - 3
    let eps: Vec<f64> = (0..n + h + 4).map(|_| rng.sample(StandardNormal)).collect();
    let normal = Normal::standard();
    let mut records = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for s in 1..=n {
        let target = s + h; // outcome time
        let idx = target + 3;
        let z = eps[idx] + theta * (1..=4).map(|j| eps[idx - j]).sum::<f64>();
        let q = ideal_forecast(&normal, &eps, idx, theta, h);
        let p = ideal_forecast(&normal, &eps, idx, theta, h + 1);
        let ok = p != q && p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0;
        let (p, q) = if ok { (p, q) } else { (0.5, 0.5) };
        records.push(ForecastRecord::new(s as i64, p, q, ok, Some(Outcome::from(z > 0.0))));
        truth.push(q);
    }
    Ok(GeneratedStream {
        lag: h,
        records,
        truth,
    })
}

/// Alternative used by an e-value method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AltChoice {
    /// The true event probability (the growth-optimal choice).
    Truth,
    /// `η = q`.
    Competitor,
    /// Equispaced convex mixtures with `k` components.
    KMixture(usize),
}

impl fmt::Display for AltChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AltChoice::Truth => f.write_str("pi"),
            AltChoice::Competitor => f.write_str("q"),
            AltChoice::KMixture(k) => write!(f, "k={k}"),
        }
    }
}

/// A testing procedure evaluated in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    EStopped(AltChoice),
    EUnstopped(AltChoice),
    TTest,
    Wilcoxon,
    DmTest,
    /// t-test with `n` equispaced optional looks plus the final look.
    TTestOptionalStop(usize),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::EStopped(a) => write!(f, "e_stopped({a})"),
            Method::EUnstopped(a) => write!(f, "e_unstopped({a})"),
            Method::TTest => f.write_str("t_test"),
            Method::Wilcoxon => f.write_str("wilcoxon"),
            Method::DmTest => f.write_str("dm_test"),
            Method::TTestOptionalStop(n) => write!(f, "t_test_optional_stop({n})"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter {
            name: "method",
            reason: format!("unknown method {s:?}"),
        };
        let alt = |a: &str| -> Result<AltChoice> {
            match a {
                "pi" => Ok(AltChoice::Truth),
                "q" => Ok(AltChoice::Competitor),
                other => other
                    .strip_prefix("k=")
                    .and_then(|k| k.parse().ok())
                    .filter(|k: &usize| *k > 0)
                    .map(AltChoice::KMixture)
                    .ok_or_else(bad),
            }
        };
        let s = s.trim();
        let inner = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
        if let Some(a) = inner("e_stopped(") {
            return Ok(Method::EStopped(alt(a)?));
        }
        if let Some(a) = inner("e_unstopped(") {
            return Ok(Method::EUnstopped(alt(a)?));
        }
        if let Some(n) = inner("t_test_optional_stop(") {
            return n.parse().map(Method::TTestOptionalStop).map_err(|_| bad());
        }
        match s {
            "t_test" => Ok(Method::TTest),
            "wilcoxon" => Ok(Method::Wilcoxon),
            "dm_test" => Ok(Method::DmTest),
            _ => Err(bad()),
        }
    }
}

impl Design {
    pub fn validate(&self) -> Result<()> {
        match self {
            Design::Uniform(d) => d.validate(),
            Design::Ma4(d) => d.validate(),
        }
    }

    pub fn generate(&self, rep: u64) -> Result<GeneratedStream> {
        match self {
            Design::Uniform(d) => gen_uniform_partial_info(d, rep),
            Design::Ma4(d) => gen_ma4(d, rep),
        }
    }

    pub fn rule(&self) -> &ScoringRule {
        match self {
            Design::Uniform(d) => &d.rule,
            Design::Ma4(d) => &d.rule,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Design::Uniform(d) => d.alpha,
            Design::Ma4(d) => d.alpha,
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            Design::Uniform(d) => d.horizon,
            Design::Ma4(d) => d.horizon,
        }
    }

    pub fn lag(&self) -> usize {
        match self {
            Design::Uniform(_) => 1,
            Design::Ma4(d) => d.lag,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Design::Uniform(_) => "uniform",
            Design::Ma4(_) => "ma4",
        }
    }
}

fn strategy_for(alt: AltChoice, rule: &ScoringRule, truth: &Arc<Vec<f64>>) -> Result<EValueStrategy> {
    let spec = match alt {
        AltChoice::Truth => {
            let truth = Arc::clone(truth);
            AlternativeSpec::oracle(move |ctx| truth[(ctx.t - 1) as usize])
        }
        AltChoice::Competitor => AlternativeSpec::competitor(),
        AltChoice::KMixture(k) => AlternativeSpec::equispaced(k)?,
    };
    Ok(EValueStrategy::new(Target::Score(rule.clone()), spec))
}

/// Score differences `S(p, y) - S(q, y)` over the steps with `c = 1`.
pub fn score_differences(rule: &ScoringRule, stream: &GeneratedStream) -> Result<ScoreDiffSeries> {
    let values = stream
        .records
        .iter()
        .filter(|r| r.c)
        .map(|r| score_diff(rule, r.p, r.q, r.y_future.expect("simulated outcomes are known")))
        .collect::<Result<Vec<_>>>()?;
    ScoreDiffSeries::new(values, stream.lag)
}

/// Rejection decisions of every method on one replication.
pub fn replicate(design: &Design, methods: &[Method], rep: u64) -> Result<Vec<bool>> {
    let stream = design.generate(rep)?;
    let alpha = design.alpha();
    let rule = design.rule();
    let truth = Arc::new(stream.truth.clone());
    let mut runs = HashMap::new();
    let mut diffs = None;
    let opts = RunOptions {
        lag: stream.lag,
        alpha: Some(alpha),
        stop_on_trigger: false,
    };
    methods
        .iter()
        .map(|m| {
            Ok(match *m {
                Method::EStopped(alt) | Method::EUnstopped(alt) => {
                    if !runs.contains_key(&alt) {
                        let strategy = strategy_for(alt, rule, &truth)?;
                        runs.insert(alt, run_sequential(&stream.records, &strategy, opts)?);
                    }
                    let run = &runs[&alt];
                    match m {
                        Method::EStopped(_) => run.rejects_stopped(alpha),
                        _ => run.rejects_at_horizon(alpha),
                    }
                }
                _ => {
                    if diffs.is_none() {
                        diffs = Some(score_differences(rule, &stream)?);
                    }
                    let d = diffs.as_ref().unwrap();
                    // a degenerate series (e.g. θ = 0) cannot reject
                    let p = match m {
                        Method::TTest => baselines::t_test_one_sided(d),
                        Method::Wilcoxon => baselines::wilcoxon_one_sided(d),
                        Method::DmTest => baselines::dm_test(d, None),
                        Method::TTestOptionalStop(n) => {
                            let stops = baselines::equispaced_stops(d.len(), *n);
                            match baselines::optional_stop_test(d, BaselineTest::TTest, &stops, alpha) {
                                Ok(r) => return Ok(r),
                                Err(Error::DegenerateVariance(_) | Error::TooShort { .. }) => return Ok(false),
                                Err(e) => return Err(e),
                            }
                        }
                        _ => unreachable!(),
                    };
                    match p {
                        Ok(p) => p <= alpha,
                        Err(Error::DegenerateVariance(_) | Error::TooShort { .. }) => false,
                        Err(e) => return Err(e),
                    }
                }
            })
        })
        .collect()
}

/// One line of a rejection-rate table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub design: &'static str,
    pub rule: String,
    pub mu: Option<f64>,
    pub theta_ma: Option<f64>,
    pub lag: usize,
    pub horizon: usize,
    pub alpha: f64,
    pub method: Method,
    pub rejections: u64,
    pub replications: u64,
    pub rate: f64,
    pub stderr: f64,
}

/// Rejection decisions for all replications, `[rep][method]`.
pub fn replicate_all(design: &Design, methods: &[Method], replications: u64) -> Result<Vec<Vec<bool>>> {
    design.validate()?;
    (0..replications)
        .into_par_iter()
        .map(|rep| replicate(design, methods, rep))
        .collect()
}

/// Rejection rates of `methods` for every design in the grid.
pub fn run_rejection_study(designs: &[Design], methods: &[Method], replications: u64) -> Result<Vec<StudyRow>> {
    if replications == 0 {
        return Err(Error::Parameter {
            name: "replications",
            reason: "must be at least 1".into(),
        });
    }
    let mut rows = Vec::with_capacity(designs.len() * methods.len());
    for design in designs {
        let decisions = replicate_all(design, methods, replications)?;
        for (j, method) in methods.iter().enumerate() {
            let rejections = decisions.iter().filter(|d| d[j]).count() as u64;
            let rate = rejections as f64 / replications as f64;
            let (mu, theta_ma) = match design {
                Design::Uniform(d) => (Some(d.mu), None),
                Design::Ma4(d) => (None, Some(d.theta_ma)),
            };
            rows.push(StudyRow {
                design: design.name(),
                rule: design.rule().to_string(),
                mu,
                theta_ma,
                lag: design.lag(),
                horizon: design.horizon(),
                alpha: design.alpha(),
                method: *method,
                rejections,
                replications,
                rate,
                stderr: (rate * (1.0 - rate) / replications as f64).sqrt(),
            });
        }
    }
    Ok(rows)
}

pub const STUDY_COLUMNS: [&str; 12] = [
    "design",
    "rule",
    "mu",
    "theta_ma",
    "lag",
    "horizon",
    "alpha",
    "method",
    "rejections",
    "rate",
    "stderr",
    "replications",
];

/// Writes a study table as CSV.
pub fn write_study_csv<W: Write>(rows: &[StudyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STUDY_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.design.to_string(),
            r.rule.clone(),
            opt(r.mu),
            opt(r.theta_ma),
            r.lag.to_string(),
            r.horizon.to_string(),
            r.alpha.to_string(),
            r.method.to_string(),
            r.rejections.to_string(),
            r.rate.to_string(),
            r.stderr.to_string(),
            r.replications.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Uniform-design grid over μ ∈ {0, 0.1, …, 1} for each horizon and level.
pub fn uniform_grid(rule: &ScoringRule, horizons: &[usize], alphas: &[f64], seed: u64) -> Vec<Design> {
    let mut out = Vec::new();
    for &horizon in horizons {
        for &alpha in alphas {
            for i in 0..=10 {
                out.push(Design::Uniform(UniformPartialInfoDesign {
                    mu: i as f64 / 10.0,
                    horizon,
                    rule: rule.clone(),
                    alpha,
                    seed,
                }));
            }
        }
    }
    out
}

/// MA(4) grid over θ, horizon and lag.
pub fn ma4_grid(rule: &ScoringRule, thetas: &[f64], horizons: &[usize], lags: &[usize], alpha: f64, seed: u64) -> Vec<Design> {
    let mut out = Vec::new();
    for &horizon in horizons {
        for &lag in lags {
            for &theta_ma in thetas {
                out.push(Design::Ma4(Ma4Design {
                    theta_ma,
                    horizon,
                    lag,
                    rule: rule.clone(),
                    alpha,
                    seed,
                }));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::Distribution;

    fn uniform(mu: f64) -> UniformPartialInfoDesign {
        UniformPartialInfoDesign {
            mu,
            horizon: 50,
            rule: ScoringRule::Brier,
            alpha: 0.05,
            seed: 11,
        }
    }

    #[test]
    fn uniform_design_probabilities() {
        let d = uniform(0.0);
        assert_eq!(d.event_probability(0.2, 0.6).unwrap(), 0.2);
        let d = uniform(0.5);
        assert!((d.event_probability(0.2, 0.6).unwrap() - 0.4).abs() < 1e-15);
        let d = uniform(1.0);
        assert_eq!(d.event_probability(0.2, 0.6).unwrap(), 0.6);
        // other rules pass through κ at μ = 0.5
        let mut d = uniform(0.5);
        d.rule = ScoringRule::Logarithmic;
        let k = kappa(&ScoringRule::Logarithmic, 0.2, 0.6).unwrap();
        assert!((d.event_probability(0.6, 0.2).unwrap() - k).abs() < 1e-15);
        d.mu = 0.75;
        let mid = 0.5 * (k + 0.6);
        assert!((d.event_probability(0.2, 0.6).unwrap() - mid).abs() < 1e-15);
    }

    #[test]
    fn streams_are_deterministic() {
        let a = gen_uniform_partial_info(&uniform(0.7), 3).unwrap();
        let b = gen_uniform_partial_info(&uniform(0.7), 3).unwrap();
        assert_eq!(a.records, b.records);
        let c = gen_uniform_partial_info(&uniform(0.7), 4).unwrap();
        assert_ne!(a.records, c.records);
        assert!(a.records.iter().all(|r| r.p > 0.0 && r.p < 1.0 && r.c));
    }

    #[test]
    fn ma4_theta_zero_is_uninformative() {
        let d = Ma4Design {
            theta_ma: 0.0,
            horizon: 100,
            lag: 2,
            rule: ScoringRule::Brier,
            alpha: 0.05,
            seed: 1,
        };
        let s = gen_ma4(&d, 0).unwrap();
        assert!(s.records.iter().all(|r| r.p == 0.5 && r.q == 0.5 && !r.c));
        let m = [Method::EStopped(AltChoice::Competitor), Method::DmTest];
        assert_eq!(replicate(&Design::Ma4(d), &m, 0).unwrap(), vec![false, false]);
    }

    #[test]
    fn ma4_lag_validation() {
        let d = Ma4Design {
            theta_ma: 0.5,
            horizon: 100,
            lag: 4,
            rule: ScoringRule::Brier,
            alpha: 0.05,
            seed: 1,
        };
        assert!(gen_ma4(&d, 0).is_err());
    }

    // Monte Carlo check of the conditional law behind the ideal forecast:
    // fix the known innovations, redraw the unknown ones.
    #[test]
    fn ma4_ideal_forecast_matches_simulation() {
        let normal = Normal::standard();
        let mut rng = replication_rng(99, 0);
        let theta: f64 = 0.8;
        for h in 1..=4 {
            let eps: Vec<f64> = (0..10).map(|_| StandardNormal.sample(&mut rng)).collect();
            let idx = 8;
            let analytic = ideal_forecast(&normal, &eps, idx, theta, h);
            let known: f64 = (h..=4).map(|j| eps[idx - j]).sum::<f64>() * theta;
            let n = 200_000;
            let mut hits = 0;
            for _ in 0..n {
                let mut z = known;
                let e0: f64 = StandardNormal.sample(&mut rng);
                z += e0;
                for _ in 1..h {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    z += theta * e;
                }
                if z > 0.0 {
                    hits += 1;
                }
            }
            let mc = hits as f64 / n as f64;
            assert!((mc - analytic).abs() < 1e-2, "h={h}: {mc} vs {analytic}");
        }
        // variance of the unknown part
        for h in 1..=3usize {
            let n = 200_000;
            let mut ss = 0.0;
            for _ in 0..n {
                let mut u: f64 = StandardNormal.sample(&mut rng);
                for _ in 1..h {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    u += theta * e;
                }
                ss += u * u;
            }
            let var = ss / n as f64;
            let expected = 1.0 + (h as f64 - 1.0) * theta * theta;
            assert!((var - expected).abs() < 2e-2 * expected, "{var} vs {expected}");
        }
    }

    #[test]
    fn ma4_forecasts_have_expected_information() {
        let d = Ma4Design {
            theta_ma: 1.0,
            horizon: 20_000,
            lag: 1,
            rule: ScoringRule::Brier,
            alpha: 0.05,
            seed: 5,
        };
        let s = gen_ma4(&d, 0).unwrap();
        // calibration of q: mean(y - q) ≈ 0; q beats p in Brier score on average
        let n = s.records.len() as f64;
        let bias: f64 = s.records.iter().map(|r| r.y_future.unwrap().as_f64() - r.q).sum::<f64>() / n;
        assert!(bias.abs() < 0.01, "{bias}");
        let d = score_differences(&ScoringRule::Brier, &s).unwrap();
        assert!(d.values.iter().sum::<f64>() > 0.0);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            Method::EStopped(AltChoice::Truth),
            Method::EUnstopped(AltChoice::KMixture(5)),
            Method::EStopped(AltChoice::Competitor),
            Method::TTest,
            Method::Wilcoxon,
            Method::DmTest,
            Method::TTestOptionalStop(3),
        ] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("e_stopped(k=0)".parse::<Method>().is_err());
        assert!("anova".parse::<Method>().is_err());
    }

    #[test]
    fn single_replication_rates_are_binary() {
        let designs = vec![Design::Uniform(uniform(0.8))];
        let rows = run_rejection_study(&designs, &[Method::TTest, Method::EStopped(AltChoice::KMixture(1))], 1).unwrap();
        for r in rows {
            assert!(r.rate == 0.0 || r.rate == 1.0);
        }
    }

    #[test]
    fn study_is_deterministic() {
        let designs = uniform_grid(&ScoringRule::Brier, &[60], &[0.05], 17);
        let methods = [Method::EStopped(AltChoice::KMixture(1)), Method::TTest, Method::TTestOptionalStop(3)];
        let a = run_rejection_study(&designs, &methods, 40).unwrap();
        let b = run_rejection_study(&designs, &methods, 40).unwrap();
        assert_eq!(a, b);
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_study_csv(&a, &mut x).unwrap();
        write_study_csv(&b, &mut y).unwrap();
        assert_eq!(x, y);
        assert!(String::from_utf8(x).unwrap().starts_with("design,rule,mu,theta_ma,lag,horizon,alpha,method"));
    }
}
