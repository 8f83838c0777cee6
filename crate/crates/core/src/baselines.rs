//! Classical one-sided tests on score differences `d_t = S(p_t, y) - S(q_t, y)`.
//!
//! All tests reject for a positive mean difference, i.e. evidence that `q`
//! outperforms `p`. None of them is valid under optional stopping;
//! [`optional_stop_test`] exists to show how badly they fail.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Score differences of a forecast pair at lag `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDiffSeries {
    pub values: Vec<f64>,
    pub lag: usize,
}

impl ScoreDiffSeries {
    pub fn new(values: Vec<f64>, lag: usize) -> Result<Self> {
        if lag == 0 {
            return Err(Error::Parameter {
                name: "lag",
                reason: "must be at least 1".into(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter {
                name: "series",
                reason: format!("non-finite score difference {bad}"),
            });
        }
        Ok(ScoreDiffSeries { values, lag })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `n` values, same lag.
    pub fn prefix(&self, n: usize) -> ScoreDiffSeries {
        ScoreDiffSeries {
            values: self.values[..n.min(self.values.len())].to_vec(),
            lag: self.lag,
        }
    }
}

fn std_normal_sf(z: f64) -> f64 {
    let n = Normal::standard();
    // sf is more accurate than 1 - cdf in the upper tail
    n.sf(z)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Variance estimates below rounding level relative to the mean square are
/// treated as zero.
fn check_variance(x: &[f64], var: f64) -> Result<()> {
    let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    if var > 1e-14 * ms {
        Ok(())
    } else {
        Err(Error::DegenerateVariance(var))
    }
}

/// One-sided Student t-test of `mean(d) <= 0`.
pub fn t_test_one_sided(series: &ScoreDiffSeries) -> Result<f64> {
    let x = &series.values;
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let m = mean(x);
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    check_variance(x, var)?;
    let t = m / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
    Ok(dist.sf(t))
}

/// z-test with the plain sample variance (`1/T` normalization).
pub fn z_test_one_sided(series: &ScoreDiffSeries) -> Result<f64> {
    let x = &series.values;
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let m = mean(x);
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
    check_variance(x, var)?;
    Ok(std_normal_sf(m / (var / n as f64).sqrt()))
}

/// Sample sizes up to this use the exact signed-rank distribution.
pub const WILCOXON_EXACT_MAX: usize = 25;

/// Midranks of `|d|`, doubled so that ties stay integral.
fn doubled_midranks(abs: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let n = abs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| abs[a].total_cmp(&abs[b]));
    let mut ranks = vec![0u64; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && abs[order[j + 1]] == abs[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share (i + j + 2) / 2; doubled: i + j + 2
        for &idx in &order[i..=j] {
            ranks[idx] = (i + j + 2) as u64;
        }
        if j > i {
            ties.push(j - i + 1);
        }
        i = j + 1;
    }
    (ranks, ties)
}

/// One-sided Wilcoxon signed-rank test of symmetry about zero against a
/// positive shift. Zeros are dropped.
///
/// Exact (tie-aware) enumeration for up to [`WILCOXON_EXACT_MAX`] nonzero
/// values, normal approximation with tie and continuity correction above.
pub fn wilcoxon_one_sided(series: &ScoreDiffSeries) -> Result<f64> {
    let nz: Vec<f64> = series.values.iter().copied().filter(|v| *v != 0.0).collect();
    let n = nz.len();
    if n < 5 {
        return Err(Error::TooShort { needed: 5, got: n });
    }
    let abs: Vec<f64> = nz.iter().map(|v| v.abs()).collect();
    let (ranks, ties) = doubled_midranks(&abs);
    let w_plus2: u64 = nz.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    if n <= WILCOXON_EXACT_MAX {
        Ok(signed_rank_upper_tail(&ranks, w_plus2))
    } else {
        let nf = n as f64;
        let w = w_plus2 as f64 / 2.0;
        let mu = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        if !(var > 0.0) {
            return Err(Error::DegenerateVariance(var));
        }
        Ok(std_normal_sf((w - mu - 0.5) / var.sqrt()))
    }
}

/// `P(W+ >= observed)` when each rank carries an independent fair sign.
fn signed_rank_upper_tail(doubled_ranks: &[u64], observed: u64) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    let mut counts = vec![0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let all = 2f64.powi(doubled_ranks.len() as i32);
    counts[observed as usize..].iter().sum::<f64>() / all
}

/// One-sided Diebold–Mariano test with a Bartlett-kernel HAC variance.
///
/// `σ² = γ₀ + 2 Σ_{j=1}^{m} (1 - j/(m+1)) γ_j` with autocovariances
/// normalized by `1/T`. The bandwidth defaults to `m = h - 1`.
pub fn dm_test(series: &ScoreDiffSeries, bandwidth: Option<usize>) -> Result<f64> {
    let x = &series.values;
    let n = x.len();
    if n < 10 {
        return Err(Error::TooShort { needed: 10, got: n });
    }
    let m = bandwidth.unwrap_or(series.lag - 1);
    let var = hac_variance(x, m);
    check_variance(x, var)?;
    Ok(std_normal_sf(mean(x) / (var / n as f64).sqrt()))
}

/// Bartlett long-run variance with bandwidth `m` (truncated at `T - 1`).
pub fn hac_variance(x: &[f64], m: usize) -> f64 {
    let n = x.len();
    let mu = mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let gamma = |j: usize| c[j..].iter().zip(&c[..n - j]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let m = m.min(n.saturating_sub(1));
    let mut var = gamma(0);
    for j in 1..=m {
        var += 2.0 * (1.0 - j as f64 / (m + 1) as f64) * gamma(j);
    }
    var
}

/// Fixed-sample test used at each look.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineTest {
    TTest,
    Wilcoxon,
    DieboldMariano { bandwidth: Option<usize> },
}

impl BaselineTest {
    pub fn p_value(&self, series: &ScoreDiffSeries) -> Result<f64> {
        match self {
            BaselineTest::TTest => t_test_one_sided(series),
            BaselineTest::Wilcoxon => wilcoxon_one_sided(series),
            BaselineTest::DieboldMariano { bandwidth } => dm_test(series, *bandwidth),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaselineTest::TTest => "t_test",
            BaselineTest::Wilcoxon => "wilcoxon",
            BaselineTest::DieboldMariano { .. } => "dm_test",
        }
    }
}

/// Looks at the data at each of `stop_points` (prefix lengths) and at the
/// full horizon, rejecting if any look has `p <= alpha`.
///
/// This procedure does not control the type I error; it reproduces the
/// inflation caused by stopping on a significant p-value.
pub fn optional_stop_test(series: &ScoreDiffSeries, test: BaselineTest, stop_points: &[usize], alpha: f64) -> Result<bool> {
    if stop_points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter {
            name: "stop_points",
            reason: "must be strictly increasing".into(),
        });
    }
    if let Some(&last) = stop_points.last() {
        if last > series.len() {
            return Err(Error::Parameter {
                name: "stop_points",
                reason: format!("stop {last} beyond horizon {}", series.len()),
            });
        }
    }
    for &s in stop_points {
        if test.p_value(&series.prefix(s))? <= alpha {
            return Ok(true);
        }
    }
    Ok(test.p_value(series)? <= alpha)
}

/// `n` equispaced looks strictly inside `1..horizon`: `horizon · j / (n + 1)`.
pub fn equispaced_stops(horizon: usize, n: usize) -> Vec<usize> {
    (1..=n).map(|j| horizon * j / (n + 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: Vec<f64>) -> ScoreDiffSeries {
        ScoreDiffSeries::new(v, 1).unwrap()
    }

    // Brute force over all 2^n sign assignments.
    fn brute_signed_rank(doubled: &[u64], observed: u64) -> f64 {
        let n = doubled.len();
        let mut hits = 0u64;
        for mask in 0u64..(1 << n) {
            let s: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| doubled[i]).sum();
            if s >= observed {
                hits += 1;
            }
        }
        hits as f64 / (1u64 << n) as f64
    }

    #[test]
    fn t_test_degenerate() {
        assert!(matches!(
            t_test_one_sided(&series(vec![0.0; 20])),
            Err(Error::DegenerateVariance(_))
        ));
        assert!(matches!(t_test_one_sided(&series(vec![1.0])), Err(Error::TooShort { .. })));
    }

    #[test]
    fn t_test_direction_and_permutation() {
        let pos: Vec<f64> = (0..30).map(|i| 1.0 + 0.01 * i as f64).collect();
        assert!(t_test_one_sided(&series(pos)).unwrap() < 1e-10);
        let v = vec![0.3, -0.1, 0.2, 0.05, -0.4, 0.6, 0.1, -0.2];
        let mut w = v.clone();
        w.reverse();
        w.swap(0, 3);
        let a = t_test_one_sided(&series(v)).unwrap();
        let b = t_test_one_sided(&series(w)).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn t_test_known_value() {
        let x = vec![1.0 - 1.0, 1.0 + 1.0, 1.0 - 1.0, 1.0 + 1.0];
        // mean 1, sample variance 4/3, t = 1 / sqrt(1/3) = sqrt(3)
        let p = t_test_one_sided(&series(x)).unwrap();
        // P(T_3 > √3) = 0.0908...; computed with the closed form for 3 df
        let t: f64 = 3f64.sqrt();
        let x3 = t / 3f64.sqrt();
        let cdf = 0.5 + (x3 / (1.0 + x3 * x3) + x3.atan()) / std::f64::consts::PI;
        assert!((p - (1.0 - cdf)).abs() < 1e-10, "{p}");
    }

    #[test]
    fn wilcoxon_exact_matches_enumeration() {
        let cases: Vec<Vec<f64>> = vec![
            vec![0.5, -0.2, 0.3, 0.9, -0.1, 0.05, 0.7],
            vec![1.0, 1.0, -1.0, 2.0, -2.0, 3.0, 0.5, -0.5, 1.0, 4.0],
            (1..=14).map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 * 0.7 }).collect(),
        ];
        for v in cases {
            let nz: Vec<f64> = v.iter().copied().filter(|x| *x != 0.0).collect();
            let abs: Vec<f64> = nz.iter().map(|x| x.abs()).collect();
            let (ranks, _) = doubled_midranks(&abs);
            let obs: u64 = nz.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
            let p = wilcoxon_one_sided(&series(v)).unwrap();
            assert!((p - brute_signed_rank(&ranks, obs)).abs() < 1e-14);
        }
    }

    #[test]
    fn wilcoxon_all_positive() {
        let v: Vec<f64> = (1..=20).map(|i| i as f64 * 0.01).collect();
        let p = wilcoxon_one_sided(&series(v)).unwrap();
        assert!((p - 2f64.powi(-20)).abs() < 1e-18);
        assert!(p < 1e-3);
    }

    #[test]
    fn wilcoxon_flip_is_corrected_complement() {
        let v = vec![0.5, -0.2, 0.3, 0.9, -0.1, 0.05, 0.7, -0.35, 0.15];
        let flipped: Vec<f64> = v.iter().map(|x| -x).collect();
        let p = wilcoxon_one_sided(&series(v.clone())).unwrap();
        let pf = wilcoxon_one_sided(&series(flipped)).unwrap();
        // p + p' = 1 + P(W+ = observed)
        let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let (ranks, _) = doubled_midranks(&abs);
        let obs: u64 = v.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
        let point = brute_signed_rank(&ranks, obs) - brute_signed_rank(&ranks, obs + 1);
        assert!((p + pf - 1.0 - point).abs() < 1e-14);
    }

    #[test]
    fn wilcoxon_symmetric_large_sample() {
        let v: Vec<f64> = (1..=60).flat_map(|i| [i as f64, -(i as f64)]).collect();
        let p = wilcoxon_one_sided(&series(v)).unwrap();
        assert!((p - 0.5).abs() < 0.02, "{p}");
        let v: Vec<f64> = (1..=60).map(|i| i as f64 * 0.3 - 5.0).collect();
        let flipped: Vec<f64> = v.iter().map(|x| -x).collect();
        let p = wilcoxon_one_sided(&series(v)).unwrap();
        let pf = wilcoxon_one_sided(&series(flipped)).unwrap();
        assert!(p + pf >= 1.0 && p + pf - 1.0 < 0.01);
        assert!(wilcoxon_one_sided(&series(vec![0.0, 0.0, 1.0, 2.0, 3.0, -1.0])).is_err());
    }

    #[test]
    fn dm_with_zero_bandwidth_is_z_test() {
        let v: Vec<f64> = (0..40).map(|i| ((i * 7 % 13) as f64 - 5.5) * 0.1).collect();
        let s = series(v);
        assert_eq!(dm_test(&s, Some(0)).unwrap(), z_test_one_sided(&s).unwrap());
        // default bandwidth at lag 1 is zero
        assert_eq!(dm_test(&s, None).unwrap(), dm_test(&s, Some(0)).unwrap());
    }

    #[test]
    fn dm_errors() {
        assert!(matches!(dm_test(&series(vec![0.2; 12]), None), Err(Error::DegenerateVariance(_))));
        assert!(matches!(dm_test(&series(vec![0.2, 0.1]), None), Err(Error::TooShort { .. })));
    }

    #[test]
    fn bartlett_variance_grows_with_positive_autocorrelation() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let eps: Vec<f64> = (0..501).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ma1: Vec<f64> = eps.windows(2).map(|w| w[1] + 0.8 * w[0]).collect();
        assert!(hac_variance(&ma1, 1) > hac_variance(&ma1, 0));
        let s = ScoreDiffSeries::new(ma1.iter().map(|v| v + 0.1).collect(), 2).unwrap();
        assert!(dm_test(&s, None).unwrap() > dm_test(&s, Some(0)).unwrap());
    }

    #[test]
    fn optional_stopping_contract() {
        let v: Vec<f64> = (0..100).map(|i| ((i * 17 % 23) as f64 - 11.0) * 0.05).collect();
        let s = series(v);
        let fixed = t_test_one_sided(&s).unwrap() <= 0.05;
        assert_eq!(optional_stop_test(&s, BaselineTest::TTest, &[], 0.05).unwrap(), fixed);
        assert!(optional_stop_test(&s, BaselineTest::TTest, &[50, 40], 0.05).is_err());
        assert!(optional_stop_test(&s, BaselineTest::TTest, &[150], 0.05).is_err());
        assert_eq!(equispaced_stops(600, 3), vec![150, 300, 450]);
        assert_eq!(equispaced_stops(600, 1), vec![300]);
        assert_eq!(equispaced_stops(600, 5), vec![100, 200, 300, 400, 500]);
    }
}
