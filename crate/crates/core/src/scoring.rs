//! Consistent scoring functions for probability forecasts of binary events.
//!
//! Every consistent score is a mixture of elementary scores
//!
//! ```text
//! S(p, y) = ∫ S_θ(p, y) dν(θ),    S_θ(p, y) = (θ - y) {1(p > θ) - 1(y > θ)}
//! ```
//!
//! so a rule is fully described by its mixing measure ν. The null hypothesis
//! "p scores at least as well as q" is an interval of event probabilities
//! whose boundary is the ν-weighted mean of θ over `[min(p,q), max(p,q))`,
//! see [`kappa`].
//!
//! Intervals are half-open `[a, b)` throughout: a forecast equal to θ scores
//! as `p <= θ`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature;

/// Relative tolerance used for all mixing-measure quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// A binary outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub fn as_f64(self) -> f64 {
        match self {
            Outcome::Zero => 0.0,
            Outcome::One => 1.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Outcome::Zero),
            1 => Some(Outcome::One),
            _ => None,
        }
    }
}

impl From<bool> for Outcome {
    fn from(b: bool) -> Self {
        if b {
            Outcome::One
        } else {
            Outcome::Zero
        }
    }
}

type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A consistent scoring function, identified by its mixing measure.
#[derive(Clone)]
pub enum ScoringRule {
    /// `(p - y)^2`, mixing density 2.
    Brier,
    /// `-log |1 - y - p|`, mixing density `1 / (θ (1 - θ))`.
    Logarithmic,
    /// `1 - |1 - y - p| / ||p||`, mixing density `(2θ² - 2θ + 1)^{-3/2}`.
    Spherical,
    /// A single elementary score; the mixing measure is a point mass at θ.
    Elementary(f64),
    /// An arbitrary Lebesgue density on (0, 1). Build with [`ScoringRule::custom`].
    CustomMixture(Density),
}

impl fmt::Debug for ScoringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoringRule::Brier => f.write_str("Brier"),
            ScoringRule::Logarithmic => f.write_str("Logarithmic"),
            ScoringRule::Spherical => f.write_str("Spherical"),
            ScoringRule::Elementary(t) => write!(f, "Elementary({t})"),
            ScoringRule::CustomMixture(_) => f.write_str("CustomMixture(..)"),
        }
    }
}

impl fmt::Display for ScoringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoringRule::Brier => f.write_str("brier"),
            ScoringRule::Logarithmic => f.write_str("logarithmic"),
            ScoringRule::Spherical => f.write_str("spherical"),
            ScoringRule::Elementary(t) => write!(f, "elementary:{t}"),
            ScoringRule::CustomMixture(_) => f.write_str("custom"),
        }
    }
}

impl FromStr for ScoringRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "brier" => Ok(ScoringRule::Brier),
            "log" | "logarithmic" => Ok(ScoringRule::Logarithmic),
            "spherical" => Ok(ScoringRule::Spherical),
            other => {
                if let Some(theta) = other.strip_prefix("elementary:") {
                    let theta: f64 = theta.parse().map_err(|_| Error::Parameter {
                        name: "rule",
                        reason: format!("bad elementary threshold {theta:?}"),
                    })?;
                    ScoringRule::elementary(theta)
                } else {
                    Err(Error::Parameter {
                        name: "rule",
                        reason: format!("unknown scoring rule {s:?}"),
                    })
                }
            }
        }
    }
}

/// Euclidean norm of `(p, 1 - p)`.
fn sph_norm(p: f64) -> f64 {
    (2.0 * p * p - 2.0 * p + 1.0).sqrt()
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

impl ScoringRule {
    pub fn elementary(theta: f64) -> Result<Self> {
        check_open("elementary threshold", theta)?;
        Ok(ScoringRule::Elementary(theta))
    }

    /// Wraps a mixing density. The density must be finite and nonnegative on a
    /// fixed interior grid, and integrable over each interior panel.
    pub fn custom<F>(density: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        for i in 1..200 {
            let theta = i as f64 / 200.0;
            let v = density(theta);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDensity(format!(
                    "density({theta}) = {v} is not a finite nonnegative number"
                )));
            }
        }
        for k in 1..19 {
            let (a, b) = (k as f64 / 20.0, (k + 1) as f64 / 20.0);
            let mass = quadrature::integrate(&density, a, b, 1e-8);
            if !mass.is_finite() {
                return Err(Error::InvalidDensity(format!(
                    "mass on [{a}, {b}) is not finite"
                )));
            }
        }
        Ok(ScoringRule::CustomMixture(Arc::new(density)))
    }

    /// Lebesgue density of the mixing measure, if it has one.
    pub fn density(&self, theta: f64) -> Option<f64> {
        match self {
            ScoringRule::Brier => Some(2.0),
            ScoringRule::Logarithmic => Some(1.0 / (theta * (1.0 - theta))),
            ScoringRule::Spherical => Some((2.0 * theta * theta - 2.0 * theta + 1.0).powf(-1.5)),
            ScoringRule::Elementary(_) => None,
            ScoringRule::CustomMixture(d) => Some(d(theta)),
        }
    }

    /// ν{[a, b)}.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        match self {
            ScoringRule::Elementary(theta) => {
                if a <= *theta && *theta < b {
                    1.0
                } else {
                    0.0
                }
            }
            ScoringRule::CustomMixture(d) => quadrature::integrate(|t| d(t), a, b, QUADRATURE_TOL),
            ScoringRule::Brier => 2.0 * (b - a),
            ScoringRule::Logarithmic => logit(b) - logit(a),
            ScoringRule::Spherical => {
                // d/dθ [(2θ - 1) / ||θ||] = (2θ² - 2θ + 1)^{-3/2}
                (2.0 * b - 1.0) / sph_norm(b) - (2.0 * a - 1.0) / sph_norm(a)
            }
        }
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Score of forecast `p` for outcome `y`; smaller is better.
pub fn score(rule: &ScoringRule, p: f64, y: Outcome) -> Result<f64> {
    match rule {
        ScoringRule::Logarithmic => check_open("forecast", p)?,
        _ => check_unit("forecast", p)?,
    }
    let yf = y.as_f64();
    Ok(match rule {
        ScoringRule::Brier => (p - yf).powi(2),
        ScoringRule::Logarithmic => -(1.0 - yf - p).abs().ln(),
        ScoringRule::Spherical => 1.0 - (1.0 - yf - p).abs() / sph_norm(p),
        ScoringRule::Elementary(theta) => elementary_score(*theta, p, y)?,
        ScoringRule::CustomMixture(d) => match y {
            // S(p, 0) = ∫_{θ < p} θ dν,  S(p, 1) = ∫_{θ >= p} (1 - θ) dν
            Outcome::Zero => quadrature::integrate(|t| t * d(t), 0.0, p, QUADRATURE_TOL),
            Outcome::One => quadrature::integrate(|t| (1.0 - t) * d(t), p, 1.0, QUADRATURE_TOL),
        },
    })
}

/// The elementary score `S_θ(p, y)`.
pub fn elementary_score(theta: f64, p: f64, y: Outcome) -> Result<f64> {
    check_open("elementary threshold", theta)?;
    check_unit("forecast", p)?;
    Ok(match y {
        Outcome::Zero if p > theta => theta,
        Outcome::One if p <= theta => 1.0 - theta,
        _ => 0.0,
    })
}

/// `d_{p,q}(y) = S(p, y) - S(q, y)`.
pub fn score_diff(rule: &ScoringRule, p: f64, q: f64, y: Outcome) -> Result<f64> {
    if p == q {
        // still validate the inputs
        score(rule, p, y)?;
        return Ok(0.0);
    }
    match rule {
        ScoringRule::CustomMixture(d) => {
            check_unit("forecast p", p)?;
            check_unit("forecast q", q)?;
            // For p < q the elementary scores differ only for θ in [p, q),
            // where S_θ(p, y) - S_θ(q, y) = y - θ.
            let (lo, hi, sign) = if p < q { (p, q, 1.0) } else { (q, p, -1.0) };
            let yf = y.as_f64();
            let v = quadrature::integrate(|t| (yf - t) * d(t), lo, hi, QUADRATURE_TOL);
            Ok(sign * v)
        }
        _ => Ok(score(rule, p, y)? - score(rule, q, y)?),
    }
}

/// κ_ν{[a, b)}: the ν-weighted mean of θ over `[a, b)`.
pub fn kappa(rule: &ScoringRule, a: f64, b: f64) -> Result<f64> {
    check_open("interval endpoint", a)?;
    check_open("interval endpoint", b)?;
    if a >= b {
        return Err(Error::DegenerateInterval { a, b });
    }
    let k = match rule {
        ScoringRule::Brier => 0.5 * (a + b),
        ScoringRule::Logarithmic => {
            ((1.0 - a) / (1.0 - b)).ln() / ((b * (1.0 - a)) / (a * (1.0 - b))).ln()
        }
        ScoringRule::Spherical => {
            let (na, nb) = (sph_norm(a), sph_norm(b));
            ((b - 1.0) * na - (a - 1.0) * nb) / ((2.0 * b - 1.0) * na - (2.0 * a - 1.0) * nb)
        }
        ScoringRule::Elementary(theta) => {
            if a <= *theta && *theta < b {
                *theta
            } else {
                return Err(Error::ZeroMass { a, b });
            }
        }
        ScoringRule::CustomMixture(d) => {
            let mass = quadrature::integrate(|t| d(t), a, b, QUADRATURE_TOL);
            if !(mass > 0.0) {
                return Err(Error::ZeroMass { a, b });
            }
            quadrature::integrate(|t| t * d(t), a, b, QUADRATURE_TOL) / mass
        }
    };
    // Rounding can push the closed forms a hair outside [a, b) on tiny intervals.
    Ok(k.clamp(a, b))
}

/// A closed probability interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// The set of event probabilities under which `p` scores no worse than `q`
/// in expectation.
pub fn null_interval(rule: &ScoringRule, p: f64, q: f64) -> Result<Interval> {
    check_open("forecast p", p)?;
    check_open("forecast q", q)?;
    if p == q {
        return Err(Error::EqualForecasts(p));
    }
    if p < q {
        Ok(Interval {
            lo: 0.0,
            hi: kappa(rule, p, q)?,
        })
    } else {
        Ok(Interval {
            lo: kappa(rule, q, p)?,
            hi: 1.0,
        })
    }
}
