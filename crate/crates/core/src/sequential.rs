//! Sequential e-processes for forecasts at lag `h`.
//!
//! The forecasts `(p_t, q_t)` issued at time `t` target the outcome
//! `Y_{t+h}`. One-period e-values are frozen when the forecast is issued
//! ([`EProcess::commit`]) and multiplied in when the outcome arrives
//! ([`EProcess::observe`]). For `h > 1` consecutive factors are not
//! conditionally independent, so the process keeps `h` interleaved products
//!
//! ```text
//! M^[k]_T = Π_{l ∈ I_k(T)} E_l(Y_{l+h}),   I_k(T) = {k + h s : l + h <= T},   k = 1..h
//! ```
//!
//! and reports their average `e_T = (1/h) Σ_k M^[k]_T`.
//!
//! Stopping at time `t` with `h > 1` still leaves `h - 1` factors whose λ was
//! fixed earlier. [`EProcess::stop_rule_lag_h`] inflates the threshold by the
//! largest inverse worst-case factor among them, which keeps the final e-value
//! above `1/α` whatever those outcomes turn out to be.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::evalue::{EValueStrategy, OnePeriodEValue};
use crate::scoring::{Outcome, ScoringRule};

/// One forecast step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastRecord {
    /// Issue time of the forecasts.
    pub t: i64,
    pub p: f64,
    pub q: f64,
    /// Condition flag; `false` means no hypothesis is made about this step.
    pub c: bool,
    /// The outcome `Y_{t+h}`, when known.
    pub y_future: Option<Outcome>,
}

impl ForecastRecord {
    pub fn new(t: i64, p: f64, q: f64, c: bool, y_future: Option<Outcome>) -> Self {
        ForecastRecord {
            t,
            p,
            q,
            c,
            y_future,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("forecast p", self.p), ("forecast q", self.q)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::ProbabilityRange {
                    what,
                    value: v,
                    allowed: "(0, 1)",
                });
            }
        }
        Ok(())
    }
}

/// A nonnegative product stored as `m · 2^x` with `m ∈ [1, 2)`, or exactly
/// zero. Rescaling by powers of two is exact, so the product matches plain
/// multiplication bit for bit while it is representable, and never overflows.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Factor {
    Zero,
    Scaled { m: f64, x: i64 },
}

const MANTISSA_MASK: u64 = (1 << 52) - 1;

fn pow2(x: i64) -> f64 {
    f64::from_bits(((x + 1023) as u64) << 52)
}

/// `v · 2^x` in scaled form; `v` must be positive and finite.
fn normalize(mut v: f64, mut x: i64) -> Factor {
    if v < f64::MIN_POSITIVE {
        v *= pow2(64);
        x -= 64;
    }
    let bits = v.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64 - 1023;
    Factor::Scaled {
        m: f64::from_bits((bits & MANTISSA_MASK) | (1023 << 52)),
        x: x + e,
    }
}

/// `m · 2^x` as an `f64`, saturating at infinity.
fn scale(m: f64, x: i64) -> f64 {
    if x > 1023 {
        f64::INFINITY
    } else if x >= -1022 {
        m * pow2(x)
    } else if x >= -1200 {
        m * pow2(x + 200) * pow2(-200)
    } else {
        0.0
    }
}

impl Factor {
    const ONE: Factor = Factor::Scaled { m: 1.0, x: 0 };

    fn times(self, e: f64) -> Factor {
        match self {
            Factor::Scaled { m, x } if e > 0.0 => normalize(m * e, x),
            _ => Factor::Zero,
        }
    }

    fn value(self) -> f64 {
        match self {
            Factor::Zero => 0.0,
            Factor::Scaled { m, x } => scale(m, x),
        }
    }
}

/// Outcome of a stopping rule check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    /// Threshold reached at the given outcome time.
    StopReject(i64),
    /// Horizon reached without rejection.
    StopHorizon(i64),
}

/// An e-process for a single alternative.
#[derive(Debug, Clone)]
pub struct EProcess {
    lag: usize,
    offsets: Vec<Factor>,
    pending: VecDeque<(i64, OnePeriodEValue)>,
    last_commit: Option<i64>,
    now: Option<i64>,
    e_path: Vec<f64>,
    p_anytime: f64,
}

impl EProcess {
    pub fn new(lag: usize) -> Result<Self> {
        if lag == 0 {
            return Err(Error::Parameter {
                name: "lag",
                reason: "must be at least 1".into(),
            });
        }
        Ok(EProcess {
            lag,
            offsets: vec![Factor::ONE; lag],
            pending: VecDeque::with_capacity(lag),
            last_commit: None,
            now: None,
            e_path: Vec::new(),
            p_anytime: 1.0,
        })
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    /// Freezes the one-period e-value for the forecast issued at `t`.
    ///
    /// Times must be contiguous, and the outcome of `t - h` must already have
    /// been observed.
    pub fn commit(&mut self, t: i64, pair: OnePeriodEValue) -> Result<()> {
        if let Some(last) = self.last_commit {
            if t != last + 1 {
                return Err(Error::Ordering {
                    expected: last + 1,
                    got: t,
                });
            }
        }
        if self.pending.len() >= self.lag {
            return Err(Error::OutcomeOverdue(self.pending[0].0));
        }
        if !(pair.e0 >= 0.0 && pair.e1 >= 0.0) || !(0.0..=1.0).contains(&pair.lambda) {
            return Err(Error::LambdaRange(pair.lambda));
        }
        self.pending.push_back((t, pair));
        self.last_commit = Some(t);
        Ok(())
    }

    /// Commits the λ-family e-value for `rec`; λ is forced to zero when the
    /// condition flag is off.
    pub fn commit_step(&mut self, rec: &ForecastRecord, rule: &ScoringRule, lambda: f64) -> Result<OnePeriodEValue> {
        let pair = if rec.c {
            OnePeriodEValue::from_lambda(rule, rec.p, rec.q, lambda)?
        } else {
            OnePeriodEValue::NEUTRAL
        };
        self.commit(rec.t, pair)?;
        Ok(pair)
    }

    /// Consumes the outcome for the oldest pending forecast and returns the
    /// updated e-value.
    pub fn observe(&mut self, y: Outcome) -> Result<f64> {
        let (t, pair) = self.pending.pop_front().ok_or(Error::NoPending)?;
        let k = offset_index(t, self.lag);
        self.offsets[k] = self.offsets[k].times(pair.value(y));
        self.now = Some(t + self.lag as i64);
        let e = self.e_current();
        self.e_path.push(e);
        let contribution = self.pending_inverse_worst() / e;
        if contribution < self.p_anytime {
            self.p_anytime = contribution;
        }
        Ok(e)
    }

    /// Outcome time of the most recent observation.
    pub fn now(&self) -> Option<i64> {
        self.now
    }

    pub fn e_current(&self) -> f64 {
        mean_of_factors(&self.offsets)
    }

    pub fn offset_products(&self) -> Vec<f64> {
        self.offsets.iter().map(|f| f.value()).collect()
    }

    pub fn e_path(&self) -> &[f64] {
        &self.e_path
    }

    pub fn p_anytime(&self) -> f64 {
        self.p_anytime
    }

    pub fn pending(&self) -> impl Iterator<Item = &(i64, OnePeriodEValue)> {
        self.pending.iter()
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// `max_j 1 / E_j(1{p_j > q_j})` over pending forecasts issued before the
    /// current outcome time; one when there are none, infinite if a pending
    /// factor can vanish.
    pub fn pending_inverse_worst(&self) -> f64 {
        let now = self.now.unwrap_or(i64::MIN);
        self.pending
            .iter()
            .filter(|(t, _)| *t < now)
            .map(|(_, pair)| 1.0 / pair.worst())
            .fold(1.0, f64::max)
    }

    /// The e-value that results if every pending forecast meets its worst
    /// outcome.
    pub fn worst_case_completion(&self) -> f64 {
        let mut offsets = self.offsets.clone();
        for (t, pair) in &self.pending {
            let k = offset_index(*t, self.lag);
            offsets[k] = offsets[k].times(pair.worst());
        }
        mean_of_factors(&offsets)
    }

    /// `τ_α` for lag one: reject once `e_t >= 1/α`.
    pub fn stop_rule_lag1(&self, alpha: f64, t_max: i64) -> Result<StopDecision> {
        if self.lag != 1 {
            return Err(Error::LagMismatch {
                expected: "lag 1",
                lag: self.lag,
            });
        }
        stop_decision(self.now, self.e_current(), 1.0, alpha, t_max)
    }

    /// `τ_{α,h}` for lag `h >= 2`. Meant to be checked after observing the
    /// outcome at time `t` and before committing the forecast issued at `t`.
    pub fn stop_rule_lag_h(&self, alpha: f64, t_max: i64) -> Result<StopDecision> {
        if self.lag < 2 {
            return Err(Error::LagMismatch {
                expected: "lag >= 2",
                lag: self.lag,
            });
        }
        stop_decision(self.now, self.e_current(), self.pending_inverse_worst(), alpha, t_max)
    }
}

fn offset_index(t: i64, lag: usize) -> usize {
    (t - 1).rem_euclid(lag as i64) as usize
}

fn mean_of_factors(offsets: &[Factor]) -> f64 {
    let top = offsets
        .iter()
        .filter_map(|f| match f {
            Factor::Scaled { x, .. } => Some(*x),
            Factor::Zero => None,
        })
        .max();
    let Some(top) = top else {
        return 0.0;
    };
    let sum: f64 = offsets
        .iter()
        .map(|f| match *f {
            Factor::Scaled { m, x } => scale(m, x - top),
            Factor::Zero => 0.0,
        })
        .sum();
    match normalize(sum / offsets.len() as f64, top) {
        Factor::Scaled { m, x } => scale(m, x),
        Factor::Zero => 0.0,
    }
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

fn stop_decision(now: Option<i64>, e: f64, inflation: f64, alpha: f64, t_max: i64) -> Result<StopDecision> {
    check_alpha(alpha)?;
    let Some(t) = now else {
        return Ok(StopDecision::Continue);
    };
    if e >= inflation / alpha {
        Ok(StopDecision::StopReject(t))
    } else if t >= t_max {
        Ok(StopDecision::StopHorizon(t))
    } else {
        Ok(StopDecision::Continue)
    }
}

/// Arithmetic mean of e-values for the same null.
pub fn merge_average(evalues: &[f64]) -> Result<f64> {
    if evalues.is_empty() {
        return Err(Error::EmptyMerge);
    }
    Ok(evalues.iter().sum::<f64>() / evalues.len() as f64)
}

/// Average of several e-processes sharing one data stream, e.g. the
/// components of a k-mixture alternative.
#[derive(Debug, Clone)]
pub struct MixtureEProcess {
    components: Vec<EProcess>,
    e_path: Vec<f64>,
    p_anytime: f64,
}

impl MixtureEProcess {
    pub fn new(lag: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyMerge);
        }
        Ok(MixtureEProcess {
            components: (0..k).map(|_| EProcess::new(lag)).collect::<Result<_>>()?,
            e_path: Vec::new(),
            p_anytime: 1.0,
        })
    }

    pub fn lag(&self) -> usize {
        self.components[0].lag
    }

    pub fn components(&self) -> &[EProcess] {
        &self.components
    }

    pub fn commit(&mut self, t: i64, pairs: &[OnePeriodEValue]) -> Result<()> {
        if pairs.len() != self.components.len() {
            return Err(Error::Parameter {
                name: "pairs",
                reason: format!("expected {} e-values, got {}", self.components.len(), pairs.len()),
            });
        }
        for (c, pair) in self.components.iter_mut().zip(pairs) {
            c.commit(t, *pair)?;
        }
        Ok(())
    }

    pub fn observe(&mut self, y: Outcome) -> Result<f64> {
        for c in &mut self.components {
            c.observe(y)?;
        }
        let e = self.e_current();
        self.e_path.push(e);
        let contribution = self.pending_inverse_worst() / e;
        if contribution < self.p_anytime {
            self.p_anytime = contribution;
        }
        Ok(e)
    }

    pub fn e_current(&self) -> f64 {
        let values: Vec<f64> = self.components.iter().map(EProcess::e_current).collect();
        merge_average(&values).expect("at least one component")
    }

    pub fn e_path(&self) -> &[f64] {
        &self.e_path
    }

    pub fn p_anytime(&self) -> f64 {
        self.p_anytime
    }

    pub fn now(&self) -> Option<i64> {
        self.components[0].now
    }

    pub fn pending_len(&self) -> usize {
        self.components[0].pending.len()
    }

    pub fn pending_inverse_worst(&self) -> f64 {
        self.components
            .iter()
            .map(EProcess::pending_inverse_worst)
            .fold(1.0, f64::max)
    }

    /// The stopping rule appropriate for the lag (`τ_α` or `τ_{α,h}`).
    pub fn stop_rule(&self, alpha: f64, t_max: i64) -> Result<StopDecision> {
        stop_decision(self.now(), self.e_current(), self.pending_inverse_worst(), alpha, t_max)
    }
}

/// Whether and where a sequential run stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub lag: usize,
    /// Significance level for the stopping rule; also used to record the first
    /// time the rule would have fired.
    pub alpha: Option<f64>,
    /// Actually stop at the first trigger.
    pub stop_on_trigger: bool,
}

/// Per-outcome diagnostics of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Outcome time, `t_issue + h`.
    pub t: i64,
    pub y: Outcome,
    /// Frozen e-values of the forecast resolved at this step, one per component.
    pub pairs: Vec<OnePeriodEValue>,
    pub e: f64,
    pub p_anytime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialRun {
    /// E-value after the last resolved outcome.
    pub final_e: f64,
    pub p_anytime: f64,
    /// Outcome time at which the stopping rule first fired.
    pub trigger_time: Option<i64>,
    /// True when the run stopped at the trigger.
    pub stopped: bool,
    pub max_e: f64,
    pub steps: Vec<StepRecord>,
}

impl SequentialRun {
    /// Rejection by the stopped e-value: the rule fired, or the e-value at the
    /// horizon reached `1/α`.
    pub fn rejects_stopped(&self, alpha: f64) -> bool {
        self.trigger_time.is_some() || self.final_e >= 1.0 / alpha
    }

    pub fn rejects_at_horizon(&self, alpha: f64) -> bool {
        self.final_e >= 1.0 / alpha
    }
}

/// Runs `strategy` over `records` (contiguous issue times, outcomes known).
///
/// At each outcome time the outcome is observed first, then the stopping rule
/// is checked, then the next forecast is committed. The strategy only sees
/// records whose outcomes have been observed.
pub fn run_sequential(records: &[ForecastRecord], strategy: &EValueStrategy, opts: RunOptions) -> Result<SequentialRun> {
    if let Some(a) = opts.alpha {
        check_alpha(a)?;
    }
    let h = opts.lag;
    let mut proc = MixtureEProcess::new(h, strategy.arity())?;
    let mut steps = Vec::with_capacity(records.len());
    let mut committed: VecDeque<Vec<OnePeriodEValue>> = VecDeque::with_capacity(h);
    let mut trigger_time = None;
    let mut stopped = false;
    let mut max_e: f64 = 1.0;
    let mut resolved = 0usize;
    let t_max = records.last().map_or(0, |r| r.t + h as i64);

    let observe_next = |proc: &mut MixtureEProcess,
                        committed: &mut VecDeque<Vec<OnePeriodEValue>>,
                        resolved: &mut usize,
                        steps: &mut Vec<StepRecord>|
     -> Result<f64> {
        let rec = &records[*resolved];
        let y = rec.y_future.ok_or(Error::Parse {
            row: *resolved + 1,
            column: "y".into(),
            reason: "outcome missing".into(),
        })?;
        let e = proc.observe(y)?;
        steps.push(StepRecord {
            t: rec.t + h as i64,
            y,
            pairs: committed.pop_front().expect("pending pairs tracked"),
            e,
            p_anytime: proc.p_anytime(),
        });
        *resolved += 1;
        Ok(e)
    };

    for (i, rec) in records.iter().enumerate() {
        rec.validate()?;
        if i > 0 && rec.t != records[i - 1].t + 1 {
            return Err(Error::Ordering {
                expected: records[i - 1].t + 1,
                got: rec.t,
            });
        }
        if i >= h {
            let e = observe_next(&mut proc, &mut committed, &mut resolved, &mut steps)?;
            max_e = max_e.max(e);
            if let Some(alpha) = opts.alpha {
                if trigger_time.is_none() {
                    if let StopDecision::StopReject(t) = proc.stop_rule(alpha, i64::MAX)? {
                        trigger_time = Some(t);
                        if opts.stop_on_trigger {
                            stopped = true;
                            break;
                        }
                    }
                }
            }
        }
        let pairs = strategy.pairs(rec, &records[..resolved])?;
        proc.commit(rec.t, &pairs)?;
        committed.push_back(pairs);
    }

    // Resolve whatever is still pending; no further forecasts are committed.
    while proc.pending_len() > 0 {
        let e = observe_next(&mut proc, &mut committed, &mut resolved, &mut steps)?;
        max_e = max_e.max(e);
        if let (Some(alpha), None, false) = (opts.alpha, trigger_time, stopped) {
            if let StopDecision::StopReject(t) = proc.stop_rule(alpha, t_max)? {
                trigger_time = Some(t);
            }
        }
    }

    Ok(SequentialRun {
        final_e: proc.e_current(),
        p_anytime: proc.p_anytime(),
        trigger_time,
        stopped,
        max_e,
        steps,
    })
}
