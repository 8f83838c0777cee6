//! One-period e-values for forecast dominance.
//!
//! For fixed forecasts `p != q` every e-value for "p scores at least as well as
//! q under S" has the form
//!
//! ```text
//! E_{p,q;λ}(y) = 1 + λ d(y) / |d(1{p > q})|,   d(y) = S(p, y) - S(q, y),   λ ∈ (0, 1]
//! ```
//!
//! and the growth-optimal member against an alternative event probability π₁
//! is the likelihood ratio of π₁ against the null boundary κ:
//! `(1 - π₁)/(1 - κ)` at `y = 0` and `π₁/κ` at `y = 1`.
//!
//! Testing dominance under all consistent scores at once replaces κ by `p`
//! itself ([`grow_all_scores`]).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scoring::{kappa, null_interval, score_diff, Interval, Outcome, ScoringRule};
use crate::sequential::ForecastRecord;

/// Lower bound applied to growth-optimal λ when rounding lands it at zero for
/// an alternative strictly outside the null.
pub const LAMBDA_EPS: f64 = 1e-12;

/// The two possible values of a one-period e-value, frozen before the outcome
/// is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnePeriodEValue {
    pub e0: f64,
    pub e1: f64,
    pub lambda: f64,
}

impl OnePeriodEValue {
    /// The trivial e-value `E ≡ 1` (λ = 0).
    pub const NEUTRAL: OnePeriodEValue = OnePeriodEValue {
        e0: 1.0,
        e1: 1.0,
        lambda: 0.0,
    };

    /// Member of the λ-family for a given rule.
    pub fn from_lambda(rule: &ScoringRule, p: f64, q: f64, lambda: f64) -> Result<Self> {
        if lambda == 0.0 {
            check_lambda(lambda)?;
            return Ok(Self::NEUTRAL);
        }
        Ok(OnePeriodEValue {
            e0: e_lambda(rule, p, q, lambda, Outcome::Zero)?,
            e1: e_lambda(rule, p, q, lambda, Outcome::One)?,
            lambda,
        })
    }

    pub fn value(&self, y: Outcome) -> f64 {
        match y {
            Outcome::Zero => self.e0,
            Outcome::One => self.e1,
        }
    }

    /// The smaller of the two values; equals `1 - λ` for the λ-family.
    pub fn worst(&self) -> f64 {
        self.e0.min(self.e1)
    }

    /// Expected value when `Y = 1` with probability `pi`.
    pub fn expectation(&self, pi: f64) -> f64 {
        (1.0 - pi) * self.e0 + pi * self.e1
    }

    pub fn is_neutral(&self) -> bool {
        self.e0 == 1.0 && self.e1 == 1.0
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::LambdaRange(lambda))
    }
}

fn check_open(what: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::ProbabilityRange {
            what,
            value: p,
            allowed: "(0, 1)",
        })
    }
}

fn check_unit(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ProbabilityRange {
            what,
            value: p,
            allowed: "[0, 1]",
        })
    }
}

/// `E_{p,q;λ}(y)`. With λ = 0 this is identically one, even for `p = q`.
pub fn e_lambda(rule: &ScoringRule, p: f64, q: f64, lambda: f64, y: Outcome) -> Result<f64> {
    check_lambda(lambda)?;
    check_open("forecast p", p)?;
    check_open("forecast q", q)?;
    if lambda == 0.0 {
        return Ok(1.0);
    }
    if p == q {
        return Err(Error::EqualForecasts(p));
    }
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    if !(rule.mass(lo, hi) > 0.0) {
        return Err(Error::ZeroMass { a: lo, b: hi });
    }
    let worst_y = Outcome::from(p > q);
    let scale = score_diff(rule, p, q, worst_y)?.abs();
    let d = score_diff(rule, p, q, y)?;
    // The value at y = 1{p > q} is exactly 1 - λ; avoid rounding there.
    if y == worst_y {
        return Ok(1.0 - lambda);
    }
    Ok((1.0 + lambda * d / scale).max(0.0))
}

fn alternative_outside(null: Interval, pi1: f64) -> Result<()> {
    // strict: the boundary belongs to the null
    if null.contains(pi1) {
        Err(Error::AlternativeInsideNull {
            pi1,
            lo: null.lo,
            hi: null.hi,
        })
    } else {
        Ok(())
    }
}

/// Growth-optimal λ against the alternative `Y ~ Bernoulli(pi1)`.
///
/// `pi1` must lie strictly outside the null interval; the result is in (0, 1].
pub fn grow_lambda(rule: &ScoringRule, p: f64, q: f64, pi1: f64) -> Result<f64> {
    check_unit("alternative", pi1)?;
    let null = null_interval(rule, p, q)?;
    alternative_outside(null, pi1)?;
    let d0 = score_diff(rule, p, q, Outcome::Zero)?;
    let d1 = score_diff(rule, p, q, Outcome::One)?;
    let lambda = if p < q {
        pi1 + (1.0 - pi1) * d0 / d1
    } else {
        (1.0 - pi1) + pi1 * d1 / d0
    };
    Ok(lambda.clamp(LAMBDA_EPS, 1.0))
}

/// Growth-optimal e-value `E^{π₁}_{p,q}(y)` via its likelihood-ratio form.
///
/// Accepts the null boundary itself (`pi1 = κ`), where the e-value is one.
pub fn grow_evalue(rule: &ScoringRule, p: f64, q: f64, pi1: f64, y: Outcome) -> Result<f64> {
    Ok(grow_pair(rule, p, q, pi1)?.value(y))
}

/// Both values of the growth-optimal e-value, with its λ.
pub fn grow_pair(rule: &ScoringRule, p: f64, q: f64, pi1: f64) -> Result<OnePeriodEValue> {
    check_unit("alternative", pi1)?;
    let null = null_interval(rule, p, q)?;
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let k = kappa(rule, lo, hi)?;
    if pi1 == k {
        return Ok(OnePeriodEValue::NEUTRAL);
    }
    alternative_outside(null, pi1)?;
    let e0 = (1.0 - pi1) / (1.0 - k);
    let e1 = pi1 / k;
    Ok(OnePeriodEValue {
        e0,
        e1,
        lambda: 1.0 - e0.min(e1),
    })
}

/// Growth-optimal e-value for dominance under every consistent scoring
/// function: the likelihood ratio of `pi1` against `p`.
pub fn grow_all_scores(p: f64, q: f64, pi1: f64, y: Outcome) -> Result<f64> {
    Ok(all_scores_pair(p, q, pi1)?.value(y))
}

pub fn all_scores_pair(p: f64, q: f64, pi1: f64) -> Result<OnePeriodEValue> {
    check_open("forecast p", p)?;
    check_open("forecast q", q)?;
    check_unit("alternative", pi1)?;
    if p == q {
        return Err(Error::EqualForecasts(p));
    }
    let null = if p < q {
        Interval { lo: 0.0, hi: p }
    } else {
        Interval { lo: p, hi: 1.0 }
    };
    alternative_outside(null, pi1)?;
    let e0 = (1.0 - pi1) / (1.0 - p);
    let e1 = pi1 / p;
    Ok(OnePeriodEValue {
        e0,
        e1,
        lambda: 1.0 - e0.min(e1),
    })
}

/// What the information available at forecast time contains.
pub struct AlternativeContext<'a> {
    pub t: i64,
    pub p: f64,
    pub q: f64,
    /// Records whose outcomes were observed before time `t`.
    pub history: &'a [ForecastRecord],
}

pub type OracleFn = Arc<dyn Fn(&AlternativeContext<'_>) -> f64 + Send + Sync>;

/// How the alternative event probability η_t is chosen at each step.
#[derive(Clone)]
pub enum AlternativeSpec {
    Fixed(f64),
    /// `η = ξ (p + q)/2 + (1 - ξ) q`.
    ConvexMixture(f64),
    /// Average of the e-processes for several convex-mixture weights.
    KMixture(Vec<f64>),
    Oracle(OracleFn),
}

impl fmt::Debug for AlternativeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlternativeSpec::Fixed(v) => write!(f, "Fixed({v})"),
            AlternativeSpec::ConvexMixture(xi) => write!(f, "ConvexMixture({xi})"),
            AlternativeSpec::KMixture(xis) => write!(f, "KMixture({xis:?})"),
            AlternativeSpec::Oracle(_) => f.write_str("Oracle(..)"),
        }
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if xi > 0.0 && xi < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlternative(format!("mixture weight {xi} not in (0, 1)")))
    }
}

impl AlternativeSpec {
    pub fn fixed(pi1: f64) -> Result<Self> {
        check_open("alternative", pi1)?;
        Ok(AlternativeSpec::Fixed(pi1))
    }

    pub fn convex_mixture(xi: f64) -> Result<Self> {
        check_xi(xi)?;
        Ok(AlternativeSpec::ConvexMixture(xi))
    }

    pub fn k_mixture(xis: Vec<f64>) -> Result<Self> {
        if xis.is_empty() {
            return Err(Error::InvalidAlternative("empty mixture".into()));
        }
        for (i, &xi) in xis.iter().enumerate() {
            check_xi(xi)?;
            if xis[..i].contains(&xi) {
                return Err(Error::InvalidAlternative(format!("duplicate weight {xi}")));
            }
        }
        Ok(AlternativeSpec::KMixture(xis))
    }

    /// `k` equispaced weights `l / (k + 1)`, `l = 1..=k`.
    pub fn equispaced(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidAlternative("k must be positive".into()));
        }
        Self::k_mixture((1..=k).map(|l| l as f64 / (k + 1) as f64).collect())
    }

    pub fn oracle<F>(f: F) -> Self
    where
        F: Fn(&AlternativeContext<'_>) -> f64 + Send + Sync + 'static,
    {
        AlternativeSpec::Oracle(Arc::new(f))
    }

    /// The competing forecast itself, `η = q`.
    pub fn competitor() -> Self {
        Self::oracle(|ctx| ctx.q)
    }

    /// Number of e-processes this alternative drives.
    pub fn arity(&self) -> usize {
        match self {
            AlternativeSpec::KMixture(xis) => xis.len(),
            _ => 1,
        }
    }
}

fn convex(xi: f64, p: f64, q: f64) -> f64 {
    xi * 0.5 * (p + q) + (1.0 - xi) * q
}

/// The alternative probabilities η_t, one per component e-process.
pub fn resolve_alternative(spec: &AlternativeSpec, ctx: &AlternativeContext<'_>) -> Vec<f64> {
    match spec {
        AlternativeSpec::Fixed(v) => vec![*v],
        AlternativeSpec::ConvexMixture(xi) => vec![convex(*xi, ctx.p, ctx.q)],
        AlternativeSpec::KMixture(xis) => xis.iter().map(|&xi| convex(xi, ctx.p, ctx.q)).collect(),
        AlternativeSpec::Oracle(f) => vec![f(ctx)],
    }
}

/// The hypothesis under test.
#[derive(Debug, Clone)]
pub enum Target {
    /// Dominance of `p` under one scoring rule.
    Score(ScoringRule),
    /// Dominance of `p` under every consistent scoring rule.
    AllScores,
}

/// Turns a forecast record into frozen one-period e-values, one per
/// component of the alternative.
#[derive(Debug, Clone)]
pub struct EValueStrategy {
    pub target: Target,
    pub alternative: AlternativeSpec,
}

impl EValueStrategy {
    pub fn new(target: Target, alternative: AlternativeSpec) -> Self {
        EValueStrategy {
            target,
            alternative,
        }
    }

    pub fn arity(&self) -> usize {
        self.alternative.arity()
    }

    /// Growth-optimal e-values for `rec` against each η. Steps with `c = 0`,
    /// equal forecasts, or an η inside the null get the neutral e-value.
    pub fn pairs(&self, rec: &ForecastRecord, history: &[ForecastRecord]) -> Result<Vec<OnePeriodEValue>> {
        let k = self.arity();
        if !rec.c || rec.p == rec.q {
            return Ok(vec![OnePeriodEValue::NEUTRAL; k]);
        }
        let ctx = AlternativeContext {
            t: rec.t,
            p: rec.p,
            q: rec.q,
            history,
        };
        resolve_alternative(&self.alternative, &ctx)
            .into_iter()
            .map(|eta| self.pair_for(rec.p, rec.q, eta))
            .collect()
    }

    fn pair_for(&self, p: f64, q: f64, eta: f64) -> Result<OnePeriodEValue> {
        check_unit("alternative", eta)?;
        match &self.target {
            Target::Score(rule) => {
                if null_interval(rule, p, q)?.contains(eta) {
                    return Ok(OnePeriodEValue::NEUTRAL);
                }
                let lambda = grow_lambda(rule, p, q, eta)?;
                OnePeriodEValue::from_lambda(rule, p, q, lambda)
            }
            Target::AllScores => {
                let inside = if p < q { eta <= p } else { eta >= p };
                if inside {
                    return Ok(OnePeriodEValue::NEUTRAL);
                }
                all_scores_pair(p, q, eta)
            }
        }
    }
}
