//! Correlation coefficients, paired and two-sample significance tests, and
//! the predictor screen built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::series::SeriesFrame;

/// Largest number of nonzero differences for which the Wilcoxon p-value is exact.
pub const WILCOXON_EXACT_MAX: usize = 25;
/// Mann-Whitney is exact when the smaller sample has at most this many points...
pub const MANN_WHITNEY_EXACT_MIN_SIDE: usize = 10;
/// ...and the pooled sample at most this many.
pub const MANN_WHITNEY_EXACT_TOTAL: usize = 20;

/// A test statistic with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

fn check_pair(x: &[f64], y: &[f64], min_len: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < min_len {
        return Err(Error::TooShort {
            needed: min_len,
            got: x.len(),
        });
    }
    Ok(())
}

fn normal_two_sided(z: f64) -> f64 {
    let n = Normal::standard();
    (2.0 * n.cdf(-z.abs())).clamp(0.0, 1.0)
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 3)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x".into()));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

struct PairCounts {
    concordant: u64,
    discordant: u64,
    /// Pairs tied in x (including joint ties).
    tied_x: u64,
    tied_y: u64,
    total: u64,
}

fn pair_counts(x: &[f64], y: &[f64]) -> PairCounts {
    let n = x.len();
    let mut c = PairCounts {
        concordant: 0,
        discordant: 0,
        tied_x: 0,
        tied_y: 0,
        total: (n * (n - 1) / 2) as u64,
    };
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[j] - x[i];
            let dy = y[j] - y[i];
            if dx == 0.0 {
                c.tied_x += 1;
            }
            if dy == 0.0 {
                c.tied_y += 1;
            }
            let s = dx * dy;
            if s > 0.0 {
                c.concordant += 1;
            } else if s < 0.0 {
                c.discordant += 1;
            }
        }
    }
    c
}

/// Kendall's tau-b by enumeration over all pairs.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 3)?;
    let c = pair_counts(x, y);
    let ax = (c.total - c.tied_x) as f64;
    let ay = (c.total - c.tied_y) as f64;
    if ax == 0.0 || ay == 0.0 {
        return Err(Error::AllTied);
    }
    let s = c.concordant as f64 - c.discordant as f64;
    Ok((s / (ax.sqrt() * ay.sqrt())).clamp(-1.0, 1.0))
}

/// Significance of Kendall's tau via the normal approximation to the
/// tie-corrected null variance of `S = concordant - discordant`.
pub fn kendall_test(x: &[f64], y: &[f64]) -> Result<TestOutcome> {
    let tau = kendall_tau_b(x, y)?;
    let c = pair_counts(x, y);
    let n = x.len() as f64;
    let s = c.concordant as f64 - c.discordant as f64;
    let tx = tie_groups(x);
    let ty = tie_groups(y);
    let sum = |g: &[usize], f: &dyn Fn(f64) -> f64| g.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    let vt = sum(&tx, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(&ty, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let v1 = sum(&tx, &|t| t * (t - 1.0)) * sum(&ty, &|t| t * (t - 1.0)) / (2.0 * n * (n - 1.0));
    let v2 = sum(&tx, &|t| t * (t - 1.0) * (t - 2.0)) * sum(&ty, &|t| t * (t - 1.0) * (t - 2.0))
        / (9.0 * n * (n - 1.0) * (n - 2.0));
    let var = (v0 - vt - vu) / 18.0 + v1 + v2;
    if !(var > 0.0) {
        return Err(Error::AllTied);
    }
    Ok(TestOutcome {
        statistic: tau,
        p_value: normal_two_sided(s / var.sqrt()),
    })
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn mid_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of tie groups with more than one member.
fn tie_groups(v: &[f64]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[i] {
            j += 1;
        }
        if j > i {
            out.push(j - i + 1);
        }
        i = j + 1;
    }
    out
}

/// Spearman's rho: Pearson correlation of mid-ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 3)?;
    pearson_r(&mid_ranks(x), &mid_ranks(y))
}

/// Correlation t-test: `r √(n-2) / √(1-r²)` with `n - 2` degrees of freedom.
pub fn correlation_t_test(x: &[f64], y: &[f64]) -> Result<TestOutcome> {
    let r = pearson_r(x, y)?;
    let df = (x.len() - 2) as f64;
    if df < 1.0 {
        return Err(Error::TooShort {
            needed: 3,
            got: x.len(),
        });
    }
    let denom = (1.0 - r * r).max(0.0).sqrt();
    if denom == 0.0 {
        return Ok(TestOutcome {
            statistic: f64::INFINITY.copysign(r),
            p_value: 0.0,
        });
    }
    let t = r * df.sqrt() / denom;
    Ok(TestOutcome {
        statistic: t,
        p_value: student_two_sided(t, df),
    })
}

fn student_two_sided(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

/// One-sample t-test on `x - y`.
pub fn paired_t_test(x: &[f64], y: &[f64]) -> Result<TestOutcome> {
    check_pair(x, y, 3)?;
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(Error::ZeroVariance("paired differences".into()));
    }
    let t = mean / (var.sqrt() / n.sqrt());
    Ok(TestOutcome {
        statistic: t,
        p_value: student_two_sided(t, n - 1.0),
    })
}

/// Two-sided p-value from a discrete null distribution given as counts over
/// integer support `0..counts.len()`.
fn exact_two_sided(counts: &[f64], observed: usize) -> f64 {
    let total: f64 = counts.iter().sum();
    let lower: f64 = counts[..=observed].iter().sum::<f64>() / total;
    let upper: f64 = counts[observed..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Wilcoxon signed-rank test on `x - y`. Zero differences are dropped; the
/// statistic is the sum of ranks of positive differences.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<TestOutcome> {
    check_pair(x, y, 1)?;
    let d: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|v| *v != 0.0)
        .collect();
    if d.is_empty() {
        return Err(Error::AllZeroDifferences);
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = mid_ranks(&abs);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let n = d.len();
    let p_value = if n <= WILCOXON_EXACT_MAX {
        // mid-ranks are multiples of 1/2, so doubled ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let max: usize = doubled.iter().sum();
        let mut counts = vec![0.0f64; max + 1];
        counts[0] = 1.0;
        for &r in &doubled {
            for s in (r..=max).rev() {
                counts[s] += counts[s - r];
            }
        }
        exact_two_sided(&counts, (2.0 * w_plus).round() as usize)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let ties: f64 = tie_groups(&abs).iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        let dev = (w_plus - mean).abs();
        let z = (dev - 0.5).max(0.0) / var.sqrt();
        normal_two_sided(z)
    };
    Ok(TestOutcome {
        statistic: w_plus,
        p_value,
    })
}

/// Mann-Whitney U for `x` (number of pairs with `x > y`, ties counting
/// one half) with a two-sided p-value.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<TestOutcome> {
    let nx = x.len();
    let ny = y.len();
    if nx.min(ny) < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: nx.min(ny),
        });
    }
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = mid_ranks(&pooled);
    let rank_sum_x: f64 = ranks[..nx].iter().sum();
    let u = rank_sum_x - (nx * (nx + 1)) as f64 / 2.0;
    let total = nx + ny;
    let p_value = if nx.min(ny) <= MANN_WHITNEY_EXACT_MIN_SIDE && total <= MANN_WHITNEY_EXACT_TOTAL {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let max: usize = doubled.iter().sum();
        // ways[k][s]: subsets of size k with doubled rank sum s
        let mut ways = vec![vec![0.0f64; max + 1]; nx + 1];
        ways[0][0] = 1.0;
        for &r in &doubled {
            for k in (1..=nx).rev() {
                for s in (r..=max).rev() {
                    ways[k][s] += ways[k - 1][s - r];
                }
            }
        }
        exact_two_sided(&ways[nx], (2.0 * rank_sum_x).round() as usize)
    } else {
        let (fx, fy, n) = (nx as f64, ny as f64, total as f64);
        let ties: f64 = tie_groups(&pooled).iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = fx * fy / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
        let dev = (u - fx * fy / 2.0).abs();
        let z = (dev - 0.5).max(0.0) / var.sqrt();
        normal_two_sided(z)
    };
    Ok(TestOutcome {
        statistic: u,
        p_value,
    })
}

/// Quantile bin (0-based) of each value, ties kept in the same bin.
fn quantile_bins(v: &[f64], bins: usize) -> Vec<usize> {
    let n = v.len() as f64;
    mid_ranks(v)
        .iter()
        .map(|r| (((r - 0.5) * bins as f64 / n).floor() as usize).min(bins - 1))
        .collect()
}

/// Pearson chi-square test of independence on a `bins × bins` table of
/// sample-quantile bins.
pub fn chi_square_independence(x: &[f64], y: &[f64], bins: usize) -> Result<TestOutcome> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bins, got {bins}")));
    }
    check_pair(x, y, 3 * bins * bins)?;
    let bx = quantile_bins(x, bins);
    let by = quantile_bins(y, bins);
    let mut table = vec![vec![0.0f64; bins]; bins];
    for (i, j) in bx.iter().zip(&by) {
        table[*i][*j] += 1.0;
    }
    let n = x.len() as f64;
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..bins).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut stat = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let e = rows[i] * cols[j] / n;
            if e < 1.0 {
                return Err(Error::SparseCells);
            }
            stat += (table[i][j] - e).powi(2) / e;
        }
    }
    let df = ((bins - 1) * (bins - 1)) as f64;
    let chi = ChiSquared::new(df).expect("positive degrees of freedom");
    Ok(TestOutcome {
        statistic: stat,
        p_value: (1.0 - chi.cdf(stat)).clamp(0.0, 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenConfig {
    /// Minimum of `max(|r|, |τ|, |ρ|)` for a strong correlation.
    pub strength_threshold: f64,
    /// Two-sided significance level for the gating tests.
    pub alpha: f64,
    pub chi2_bins: usize,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self {
            strength_threshold: 0.7,
            alpha: 0.01,
            chi2_bins: 2,
        }
    }
}

/// Screening outcome for one candidate predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub predictor: String,
    pub r: f64,
    pub tau: f64,
    pub rho: f64,
    /// Keys: `t` (correlation t-test), `kendall`, `chi2`, `wilcoxon`, `mannwhitney`.
    pub tests: BTreeMap<String, TestOutcome>,
    /// Tests that could not be computed, with the reason.
    pub skipped: BTreeMap<String, String>,
    pub strong: bool,
    pub passes: bool,
}

/// Name of the aggregate row added when more than one predictor is screened.
pub fn aggregate_name(predictors: &[&str]) -> String {
    format!("aggregate({})", predictors.join("+"))
}

fn screen_one(name: &str, target: &[f64], x: &[f64], config: &ScreenConfig) -> Result<ScreenReport> {
    let r = pearson_r(x, target)?;
    let tau = kendall_tau_b(x, target)?;
    let rho = spearman_rho(x, target)?;
    let mut tests = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    let mut record = |key: &str, outcome: Result<TestOutcome>| match outcome {
        Ok(o) => {
            tests.insert(key.to_string(), o);
        }
        Err(e) => {
            skipped.insert(key.to_string(), e.to_string());
        }
    };
    record("t", correlation_t_test(x, target));
    record("kendall", kendall_test(x, target));
    record("chi2", chi_square_independence(x, target, config.chi2_bins));
    record("wilcoxon", wilcoxon_signed_rank(x, target));
    record("mannwhitney", mann_whitney_u(x, target));
    let strong = r.abs().max(tau.abs()).max(rho.abs()) >= config.strength_threshold;
    let significant = |key: &str| tests.get(key).is_some_and(|o| o.p_value < config.alpha);
    let passes = strong && significant("t") && significant("kendall");
    Ok(ScreenReport {
        predictor: name.to_string(),
        r,
        tau,
        rho,
        tests,
        skipped,
        strong,
        passes,
    })
}

/// Screens each predictor against the target, plus the predictors' sum when
/// there is more than one.
pub fn predictor_screen(
    frame: &SeriesFrame,
    target: &str,
    predictors: &[&str],
    config: &ScreenConfig,
) -> Result<Vec<ScreenReport>> {
    let y = frame.column(target)?.values();
    let mut out = Vec::with_capacity(predictors.len() + 1);
    let mut sum = vec![0.0; y.len()];
    for name in predictors {
        let x = frame.column(name)?.values();
        for (s, v) in sum.iter_mut().zip(x) {
            *s += v;
        }
        out.push(screen_one(name, y, x, config)?);
    }
    if predictors.len() > 1 {
        out.push(screen_one(&aggregate_name(predictors), y, &sum, config)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
