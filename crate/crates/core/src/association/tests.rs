use super::*;
use crate::series::align;
use crate::simulate::{white_noise, Rng};
use crate::AnnualSeries;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

const X3: [f64; 3] = [1.0, 2.0, 3.0];
const Y3: [f64; 3] = [3.0, 5.0, 4.0];

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn pearson_examples() {
    let x = [1.0, 4.0, 2.0, 8.0, 5.0];
    let lin: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    assert!(close(pearson_r(&x, &lin).unwrap(), 1.0, 1e-15));
    assert!(close(pearson_r(&x, &neg).unwrap(), -1.0, 1e-15));
    assert!(close(pearson_r(&X3, &Y3).unwrap(), 0.5, 1e-15));
    assert!(matches!(pearson_r(&[1.0; 4], &x[..4]), Err(Error::ZeroVariance(_))));
    assert!(matches!(pearson_r(&X3, &x), Err(Error::LengthMismatch { .. })));
}

#[test]
fn kendall_examples() {
    assert_eq!(kendall_tau_b(&[1.0, 2.0, 5.0, 9.0], &[0.1, 0.2, 0.3, 7.0]).unwrap(), 1.0);
    assert!(close(kendall_tau_b(&X3, &Y3).unwrap(), 1.0 / 3.0, 1e-15));
    assert_eq!(kendall_tau_b(&[1.0; 3], &Y3).unwrap_err(), Error::AllTied);
}

#[test]
fn spearman_examples() {
    assert!(close(spearman_rho(&X3, &Y3).unwrap(), 0.5, 1e-15));
    let x = [0.3, 1.5, 2.0, 7.0, 7.5];
    let y: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
    assert!(close(spearman_rho(&x, &y).unwrap(), 1.0, 1e-15));
    assert_eq!(mid_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
}

#[test]
fn paired_t_examples() {
    assert!(matches!(paired_t_test(&X3, &X3), Err(Error::ZeroVariance(_))));
    let x = [2.0, 3.0, 4.0, 5.0];
    let y = [1.0, 2.0, 3.0, 4.0];
    assert!(matches!(paired_t_test(&x, &y), Err(Error::ZeroVariance(_))));
    let d = [1.0, 2.0, 3.0, 4.0, 5.0];
    let r = paired_t_test(&d, &[0.0; 5]).unwrap();
    assert!(close(r.statistic, 4.242640687119285, 1e-12));
    // t-CDF oracle through the regularized incomplete beta identity
    let t = r.statistic;
    let p = statrs::function::beta::beta_reg(2.0, 0.5, 4.0 / (4.0 + t * t));
    assert!(close(r.p_value, p, 1e-12));
    assert!(close(r.p_value, 0.0132, 5e-5));
    let dist = StudentsT::new(0.0, 1.0, 4.0).unwrap();
    assert!(close(r.p_value, 2.0 * (1.0 - dist.cdf(t)), 1e-12));
}

/// Wilcoxon p-value by visiting all 2ⁿ sign patterns in Gray-code order.
fn wilcoxon_enumerated(d: &[f64]) -> (f64, f64) {
    let nz: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
    let ranks = mid_ranks(&nz.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let observed: f64 = nz.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let n = nz.len();
    let mut positive = vec![false; n];
    let mut current = 0.0;
    let (mut le, mut ge) = (0u64, 0u64);
    let total = 1u64 << n;
    for step in 0..total {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            positive[bit] = !positive[bit];
            current += if positive[bit] { ranks[bit] } else { -ranks[bit] };
        }
        if current <= observed + 1e-9 {
            le += 1;
        }
        if current >= observed - 1e-9 {
            ge += 1;
        }
    }
    let p = (2.0 * (le.min(ge) as f64) / total as f64).min(1.0);
    (observed, p)
}

#[test]
fn wilcoxon_examples() {
    let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5]).unwrap();
    assert_eq!(r.statistic, 15.0);
    assert!(close(r.p_value, 2.0 / 32.0, 1e-15));
    let r = wilcoxon_signed_rank(&[-2.5, 2.5], &[0.0, 0.0]).unwrap();
    assert_eq!(r.p_value, 1.0);
    assert_eq!(wilcoxon_signed_rank(&X3, &X3).unwrap_err(), Error::AllZeroDifferences);
}

#[test]
fn wilcoxon_exact_matches_enumeration() {
    let mut rng = Rng::seeded(21);
    for n in 1..=16 {
        for _ in 0..3 {
            // rounded values create ties and zeros
            let d: Vec<f64> = (0..n).map(|_| (rng.normal() * 3.0).round()).collect();
            if d.iter().all(|v| *v == 0.0) {
                continue;
            }
            let r = wilcoxon_signed_rank(&d, &vec![0.0; n]).unwrap();
            let (w, p) = wilcoxon_enumerated(&d);
            assert!(close(r.statistic, w, 1e-12));
            assert!(close(r.p_value, p, 1e-12), "n={n} {} vs {p}", r.p_value);
        }
    }
}

fn combinations(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        out(cur);
        return;
    }
    for i in start..n {
        cur.push(i);
        combinations(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Mann-Whitney p-value by enumerating every split of the pooled ranks.
fn mann_whitney_enumerated(x: &[f64], y: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = mid_ranks(&pooled);
    let nx = x.len();
    let u_of = |sum: f64| sum - (nx * (nx + 1)) as f64 / 2.0;
    let observed = u_of(ranks[..nx].iter().sum());
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    combinations(pooled.len(), nx, 0, &mut Vec::new(), &mut |idx| {
        let u = u_of(idx.iter().map(|&i| ranks[i]).sum());
        total += 1;
        if u <= observed + 1e-9 {
            le += 1;
        }
        if u >= observed - 1e-9 {
            ge += 1;
        }
    });
    (observed, (2.0 * le.min(ge) as f64 / total as f64).min(1.0))
}

#[test]
fn mann_whitney_examples() {
    let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
    assert_eq!(r.statistic, 0.0);
    assert!(close(r.p_value, 0.1, 1e-15));
    let r = mann_whitney_u(&[1.0, 4.0, 2.0], &[4.0, 2.0, 1.0]).unwrap();
    assert_eq!(r.statistic, 4.5);
    assert_eq!(r.p_value, 1.0);
    let r = mann_whitney_u(&[1.0, 2.0, 4.0], &[3.0, 5.0, 6.0]).unwrap();
    assert_eq!(r.statistic, 1.0);
    assert!(matches!(mann_whitney_u(&[1.0, 2.0], &X3), Err(Error::TooShort { .. })));
}

#[test]
fn mann_whitney_exact_matches_enumeration() {
    let mut rng = Rng::seeded(5);
    for nx in 3..=10 {
        for ny in 3..=(20 - nx) {
            let x: Vec<f64> = (0..nx).map(|_| (rng.normal() * 2.0).round()).collect();
            let y: Vec<f64> = (0..ny).map(|_| (rng.normal() * 2.0 + 0.5).round()).collect();
            let r = mann_whitney_u(&x, &y).unwrap();
            let (u, p) = mann_whitney_enumerated(&x, &y);
            assert!(close(r.statistic, u, 1e-12));
            assert!(close(r.p_value, p, 1e-12), "nx={nx} ny={ny}");
        }
    }
}

#[test]
fn normal_approximations_are_sane() {
    let mut rng = Rng::seeded(9);
    let x = white_noise(&mut rng, 1.0, 40);
    let y: Vec<f64> = white_noise(&mut rng, 1.0, 40).iter().map(|v| v + 3.0).collect();
    assert!(mann_whitney_u(&x, &y).unwrap().p_value < 1e-6);
    let d: Vec<f64> = (1..=40).map(|i| i as f64).collect();
    assert!(wilcoxon_signed_rank(&d, &vec![0.0; 40]).unwrap().p_value < 1e-6);
}

/// Brute-force tau-b and rank-then-Pearson rho, independent of the
/// production helpers.
fn tau_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in 0..n {
            if i < j {
                s += ((x[j] - x[i]).signum() * (y[j] - y[i]).signum()) as i64;
            }
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

fn rho_oracle(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| 1.0 + v.iter().filter(|b| *b < a).count() as f64)
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

#[test]
fn tau_and_rho_match_brute_force() {
    let mut rng = Rng::seeded(12);
    for n in 3..=12 {
        for _ in 0..20 {
            let x = white_noise(&mut rng, 1.0, n);
            let y: Vec<f64> = x.iter().map(|v| v + rng.normal()).collect();
            assert!(close(kendall_tau_b(&x, &y).unwrap(), tau_oracle(&x, &y), 1e-15));
            assert!(close(spearman_rho(&x, &y).unwrap(), rho_oracle(&x, &y), 1e-12));
        }
    }
}

#[test]
fn chi_square_examples() {
    let mut rng = Rng::seeded(3);
    let x: Vec<f64> = (0..400).map(|_| rng.uniform()).collect();
    assert!(chi_square_independence(&x, &x, 2).unwrap().p_value < 0.01);
    assert!(matches!(
        chi_square_independence(&x[..10], &x[..10], 3),
        Err(Error::TooShort { needed: 27, got: 10 })
    ));
}

#[test]
fn chi_square_sparse_cells() {
    // a tied block forces every value into one bin
    let x = [1.0; 12];
    let y: Vec<f64> = (0..12).map(|i| i as f64).collect();
    assert_eq!(chi_square_independence(&x, &y, 2).unwrap_err(), Error::SparseCells);
}

fn frame(cols: Vec<(&str, Vec<f64>)>) -> SeriesFrame {
    let s: Vec<AnnualSeries> = cols
        .into_iter()
        .map(|(n, v)| AnnualSeries::new(n, 1995, v).unwrap())
        .collect();
    align(&s).unwrap()
}

#[test]
fn screen_self_correlation_passes() {
    let mut rng = Rng::seeded(14);
    let y: Vec<f64> = (0..16).map(|t| 100.0 + 5.0 * t as f64 + rng.normal()).collect();
    let f = frame(vec![("rev", y.clone()), ("copy", y)]);
    let out = predictor_screen(&f, "rev", &["copy"], &ScreenConfig::default()).unwrap();
    assert_eq!(out.len(), 1);
    let r = &out[0];
    assert!(close(r.r, 1.0, 1e-12) && r.tau == 1.0 && close(r.rho, 1.0, 1e-12));
    assert!(r.passes);
    assert!(r.skipped.contains_key("wilcoxon"));
}

#[test]
fn screen_rejects_noise() {
    let mut passed = 0;
    for seed in 0..200 {
        let mut rng = Rng::seeded(900 + seed);
        let y: Vec<f64> = (0..20).map(|t| 50.0 + t as f64 + rng.normal()).collect();
        let x = white_noise(&mut rng, 1.0, 20);
        let f = frame(vec![("rev", y), ("noise", x)]);
        if predictor_screen(&f, "rev", &["noise"], &ScreenConfig::default()).unwrap()[0].passes {
            passed += 1;
        }
    }
    assert!(passed <= 10, "{passed}/200 noise predictors passed");
}

#[test]
fn screen_adds_aggregate_row() {
    let mut rng = Rng::seeded(15);
    let a: Vec<f64> = (0..20).map(|t| 10.0 + t as f64 + rng.normal()).collect();
    let b: Vec<f64> = (0..20).map(|t| 5.0 + 0.5 * t as f64 + rng.normal()).collect();
    let y: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.2 * (p + q) + 0.1 * rng.normal()).collect();
    let f = frame(vec![("rev", y), ("a", a), ("b", b)]);
    let out = predictor_screen(&f, "rev", &["a", "b"], &ScreenConfig::default()).unwrap();
    assert_eq!(out.len(), 3);
    assert_eq!(out[2].predictor, "aggregate(a+b)");
    for r in &out {
        for o in r.tests.values() {
            assert!((0.0..=1.0).contains(&o.p_value));
        }
    }
    assert!(predictor_screen(&f, "rev", &["zzz"], &ScreenConfig::default()).is_err());
}

proptest! {
    #[test]
    fn coefficients_bounded_and_symmetric(
        pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..15)
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let r = pearson_r(&x, &y).unwrap();
        let t = kendall_tau_b(&x, &y).unwrap();
        let s = spearman_rho(&x, &y).unwrap();
        for v in [r, t, s] {
            prop_assert!((-1.0..=1.0).contains(&v));
        }
        prop_assert!((pearson_r(&y, &x).unwrap() - r).abs() < 1e-12);
        prop_assert_eq!(kendall_tau_b(&y, &x).unwrap(), t);
        prop_assert!((spearman_rho(&y, &x).unwrap() - s).abs() < 1e-12);
        prop_assert!((correlation_t_test(&y, &x).unwrap().p_value - correlation_t_test(&x, &y).unwrap().p_value).abs() < 1e-12);
        prop_assert!((kendall_test(&y, &x).unwrap().p_value - kendall_test(&x, &y).unwrap().p_value).abs() < 1e-12);
        {
            let mw = mann_whitney_u(&x, &y).unwrap().p_value;
            prop_assert!((mann_whitney_u(&y, &x).unwrap().p_value - mw).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&mw));
        }
        let a = wilcoxon_signed_rank(&x, &y).unwrap().p_value;
        prop_assert!((wilcoxon_signed_rank(&y, &x).unwrap().p_value - a).abs() < 1e-12);
    }

    #[test]
    fn coefficients_invariant_under_increasing_maps(
        pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..15),
        a in 0.1f64..10.0,
        b in -50.0f64..50.0,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let xm: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        prop_assert!((pearson_r(&xa, &y).unwrap() - pearson_r(&x, &y).unwrap()).abs() < 1e-10);
        prop_assert!((kendall_tau_b(&xm, &y).unwrap() - kendall_tau_b(&x, &y).unwrap()).abs() < 1e-10);
        prop_assert!((spearman_rho(&xm, &y).unwrap() - spearman_rho(&x, &y).unwrap()).abs() < 1e-10);
    }
}
