//! ARMA(p, q) estimation by conditional sum of squares.
//!
//! Sign conventions: `w_t = φ₁w_{t-1} + … + φ_p w_{t-p} + e_t + θ₁e_{t-1} + … + θ_q e_{t-q}`.
//! Pre-sample innovations are zero and the recursion starts at `t = p`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::optim::{nelder_mead, NelderMeadConfig};

/// Inverse roots of fitted polynomials are kept at or inside this modulus.
pub const MAX_ROOT_MODULUS: f64 = 0.999;

/// Objective tolerance for the simplex search (objective is CSS divided by
/// the sum of squares of the input, so it is scale free).
pub const CSS_F_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaFit {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// Conditional sum of squared innovations.
    pub css: f64,
    /// Number of innovations entering `css` (`n - p`).
    pub n_eff: usize,
    pub converged: bool,
}

impl ArmaFit {
    pub fn sigma2(&self) -> f64 {
        self.css / self.n_eff as f64
    }
}

/// Innovations `e_t` for `t = p..n`, computed by the conditional recursion.
///
/// The same recursion is the ARMA "whitening" filter applied to regressors
/// in GLS steps.
pub fn innovations(w: &[f64], phi: &[f64], theta: &[f64]) -> Vec<f64> {
    let p = phi.len();
    let n = w.len();
    if n <= p {
        return Vec::new();
    }
    let mut e = vec![0.0; n];
    for t in p..n {
        let mut v = w[t];
        for (i, a) in phi.iter().enumerate() {
            v -= a * w[t - 1 - i];
        }
        for (j, b) in theta.iter().enumerate() {
            if t > j {
                v -= b * e[t - 1 - j];
            }
        }
        e[t] = v;
    }
    e.split_off(p)
}

pub fn css(w: &[f64], phi: &[f64], theta: &[f64]) -> f64 {
    innovations(w, phi, theta).iter().map(|e| e * e).sum()
}

/// Roots of the monic polynomial `z^m + c₁z^{m-1} + … + c_m` by
/// Durand-Kerner iteration.
fn monic_roots(c: &[f64]) -> Vec<Complex<f64>> {
    let m = c.len();
    match m {
        0 => return Vec::new(),
        1 => return vec![Complex::new(-c[0], 0.0)],
        _ => {}
    }
    let eval = |z: Complex<f64>| {
        let mut acc = Complex::new(1.0, 0.0);
        for &ci in c {
            acc = acc * z + ci;
        }
        acc
    };
    let radius = 1.0 + c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex<f64>> = (0..m).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..m {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..m {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex::new(1e-12, 0.0);
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 {
            break;
        }
    }
    roots
}

/// Inverse roots `r_i` such that `1 + c₁z + … + c_m z^m = Π (1 - r_i z)`.
pub fn inverse_roots(c: &[f64]) -> Vec<Complex<f64>> {
    // 1 + c1 z + ... = Π(1 - r z)  <=>  r are roots of x^m + c1 x^{m-1} + ... + c_m
    monic_roots(c)
}

fn poly_from_inverse_roots(roots: &[Complex<f64>]) -> Vec<f64> {
    // Π(1 - r z) expanded; coefficient k is for z^k.
    let mut coef = vec![Complex::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); coef.len() + 1];
        for (k, a) in coef.iter().enumerate() {
            next[k] += a;
            next[k + 1] -= a * r;
        }
        coef = next;
    }
    coef.into_iter().skip(1).map(|c| c.re).collect()
}

/// Maps `1 + c₁z + … + c_m z^m` into the region where all inverse roots lie
/// inside the unit circle: roots outside are reflected to `1/conj(r)` and
/// any modulus is capped at [`MAX_ROOT_MODULUS`]. Returns the input unchanged
/// when it is already strictly inside.
pub fn reflect_into_unit_circle(c: &[f64]) -> Result<Vec<f64>> {
    if c.is_empty() {
        return Ok(Vec::new());
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonInvertible);
    }
    let roots = inverse_roots(c);
    if roots.iter().all(|r| r.norm() <= MAX_ROOT_MODULUS) {
        return Ok(c.to_vec());
    }
    let fixed: Vec<Complex<f64>> = roots
        .iter()
        .map(|&r| {
            let m = r.norm();
            let r = if m > 1.0 { (r / m) / m } else { r };
            let m = r.norm();
            if m > MAX_ROOT_MODULUS {
                r * (MAX_ROOT_MODULUS / m)
            } else {
                r
            }
        })
        .collect();
    let out = poly_from_inverse_roots(&fixed);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonInvertible);
    }
    Ok(out)
}

/// AR coefficients in the stationary region (`1 - φ₁z - …` has inverse roots inside).
pub fn stationary_ar(phi: &[f64]) -> Result<Vec<f64>> {
    let c: Vec<f64> = phi.iter().map(|v| -v).collect();
    Ok(reflect_into_unit_circle(&c)?.iter().map(|v| -v).collect())
}

/// MA coefficients in the invertible region.
pub fn invertible_ma(theta: &[f64]) -> Result<Vec<f64>> {
    reflect_into_unit_circle(theta)
}

pub fn is_stationary(phi: &[f64]) -> bool {
    let c: Vec<f64> = phi.iter().map(|v| -v).collect();
    inverse_roots(&c).iter().all(|r| r.norm() < 1.0)
}

pub fn is_invertible(theta: &[f64]) -> bool {
    inverse_roots(theta).iter().all(|r| r.norm() < 1.0)
}

/// Hannan-Rissanen start values: a long autoregression supplies innovation
/// estimates, then `w_t` is regressed on its own lags and lagged innovations.
pub fn hannan_rissanen(w: &[f64], p: usize, q: usize) -> (Vec<f64>, Vec<f64>) {
    let n = w.len();
    let zero = (vec![0.0; p], vec![0.0; q]);
    if p + q == 0 {
        return zero;
    }
    let long = if q == 0 {
        0
    } else {
        (p + q + 2).max((n as f64).ln().ceil() as usize).min(n / 3)
    };
    if q > 0 && long == 0 {
        return zero;
    }
    // Step 1: long AR residuals.
    let mut ehat = vec![0.0; n];
    if q > 0 {
        let rows = n - long;
        let x = DMatrix::from_fn(rows, long, |i, j| w[long + i - 1 - j]);
        let y = DVector::from_fn(rows, |i, _| w[long + i]);
        match least_squares(&x, &y) {
            Ok(fit) => {
                for i in 0..rows {
                    ehat[long + i] = fit.residuals[i];
                }
            }
            Err(_) => return zero,
        }
    }
    // Step 2: regression on lags of w and ehat.
    let start = long + p.max(q);
    if n <= start + p + q + 1 {
        return zero;
    }
    let rows = n - start;
    let x = DMatrix::from_fn(rows, p + q, |i, j| {
        let t = start + i;
        if j < p {
            w[t - 1 - j]
        } else {
            ehat[t - 1 - (j - p)]
        }
    });
    let y = DVector::from_fn(rows, |i, _| w[start + i]);
    match least_squares(&x, &y) {
        Ok(fit) => {
            let phi: Vec<f64> = fit.beta.iter().take(p).copied().collect();
            let theta: Vec<f64> = fit.beta.iter().skip(p).copied().collect();
            let phi = stationary_ar(&phi).unwrap_or_else(|_| vec![0.0; p]);
            let theta = invertible_ma(&theta).unwrap_or_else(|_| vec![0.0; q]);
            (phi, theta)
        }
        Err(_) => zero,
    }
}

/// Fits a zero-mean ARMA(p, q) to `w` by conditional sum of squares.
///
/// Start values come from [`hannan_rissanen`]; the simplex search evaluates
/// the objective at the reflected (stationary, invertible) parameters so the
/// returned coefficients always satisfy both conditions.
pub fn fit_css(w: &[f64], p: usize, q: usize) -> Result<ArmaFit> {
    fit_css_from(w, p, q, None)
}

/// As [`fit_css`], additionally trying `start` (`[φ…, θ…]`) as an initial point.
pub fn fit_css_from(w: &[f64], p: usize, q: usize, start: Option<&[f64]>) -> Result<ArmaFit> {
    let n = w.len();
    if n < p + q + 2 {
        return Err(Error::TooShort {
            needed: p + q + 2,
            got: n,
        });
    }
    if p + q == 0 {
        return Ok(ArmaFit {
            phi: Vec::new(),
            theta: Vec::new(),
            css: css(w, &[], &[]),
            n_eff: n,
            converged: true,
        });
    }
    let scale = w.iter().map(|v| v * v).sum::<f64>();
    if scale == 0.0 {
        return Ok(ArmaFit {
            phi: vec![0.0; p],
            theta: vec![0.0; q],
            css: 0.0,
            n_eff: n - p,
            converged: true,
        });
    }
    let split = |x: &[f64]| -> Option<(Vec<f64>, Vec<f64>)> {
        let phi = stationary_ar(&x[..p]).ok()?;
        let theta = invertible_ma(&x[p..]).ok()?;
        Some((phi, theta))
    };
    let objective = |x: &[f64]| match split(x) {
        Some((phi, theta)) => css(w, &phi, &theta) / scale,
        None => f64::INFINITY,
    };

    let (phi0, theta0) = hannan_rissanen(w, p, q);
    let mut starts = vec![[phi0, theta0].concat(), vec![0.0; p + q]];
    if let Some(s) = start.filter(|s| s.len() == p + q) {
        starts.insert(0, s.to_vec());
    }
    starts.dedup();
    let config = NelderMeadConfig {
        f_tol: CSS_F_TOL,
        max_iter: 4000,
        step: 0.1,
    };
    let mut best: Option<crate::optim::Minimum> = None;
    for x0 in &starts {
        // One restart from the first optimum guards against early collapse.
        let first = nelder_mead(objective, x0, config);
        let second = nelder_mead(objective, &first.x, config);
        let m = if second.f <= first.f { second } else { first };
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");
    let (phi, theta) = split(&best.x).ok_or(Error::NonInvertible)?;
    let css_value = css(w, &phi, &theta);
    Ok(ArmaFit {
        phi,
        theta,
        css: css_value,
        n_eff: n - p,
        converged: best.converged,
    })
}

/// Point forecasts `w_{n+1..n+h}` given the observed history and its
/// innovations (aligned to the end of `w`; missing early innovations are zero).
pub fn forecast(w: &[f64], e: &[f64], phi: &[f64], theta: &[f64], horizon: usize) -> Vec<f64> {
    let n = w.len();
    let offset = n - e.len().min(n);
    let innov = |t: usize| -> f64 {
        if t >= offset {
            e[t - offset]
        } else {
            0.0
        }
    };
    let mut hist: Vec<f64> = w.to_vec();
    let mut out = Vec::with_capacity(horizon);
    for h in 0..horizon {
        let t = n + h;
        let mut v = 0.0;
        for (i, a) in phi.iter().enumerate() {
            if t > i {
                v += a * hist[t - 1 - i];
            }
        }
        for (j, b) in theta.iter().enumerate() {
            // Only past (observed) innovations contribute.
            if t > j && t - 1 - j < n {
                v += b * innov(t - 1 - j);
            }
        }
        hist.push(v);
        out.push(v);
    }
    out
}

/// Full-length innovations (zeros for the first `p` points), aligned with `w`.
pub fn innovations_aligned(w: &[f64], phi: &[f64], theta: &[f64]) -> Vec<f64> {
    let p = phi.len();
    let mut e = vec![0.0; p.min(w.len())];
    e.extend(innovations(w, phi, theta));
    e
}

/// Exact Gaussian log-likelihood of a zero-mean ARMA, with the innovation
/// variance concentrated out. Evaluated by a Kalman filter started from the
/// stationary state covariance, so every observation counts.
pub fn exact_loglik(w: &[f64], phi: &[f64], theta: &[f64]) -> Result<f64> {
    let n = w.len();
    if n == 0 {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let r = phi.len().max(theta.len() + 1);
    let mut t = DMatrix::<f64>::zeros(r, r);
    for (i, a) in phi.iter().enumerate() {
        t[(i, 0)] = *a;
    }
    for i in 0..r - 1 {
        t[(i, i + 1)] = 1.0;
    }
    let mut rv = DVector::<f64>::zeros(r);
    rv[0] = 1.0;
    for (j, b) in theta.iter().enumerate() {
        rv[j + 1] = *b;
    }
    let q = &rv * rv.transpose();
    // stationary covariance: vec P = (I - T⊗T)⁻¹ vec(RRᵀ)
    let lhs = DMatrix::<f64>::identity(r * r, r * r) - t.kronecker(&t);
    let vec_q = DVector::from_column_slice(q.as_slice());
    let vec_p = lhs.lu().solve(&vec_q).ok_or(Error::NonInvertible)?;
    let mut pm = DMatrix::from_column_slice(r, r, vec_p.as_slice());
    let mut a = DVector::<f64>::zeros(r);
    let mut sum_log_f = 0.0;
    let mut sum_v2 = 0.0;
    for &obs in w {
        let f = pm[(0, 0)];
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::NonInvertible);
        }
        let v = obs - a[0];
        sum_log_f += f.ln();
        sum_v2 += v * v / f;
        let k = &t * pm.column(0) / f;
        a = &t * a + &k * v;
        pm = &t * &pm * t.transpose() + &q - &k * k.transpose() * f;
    }
    let nf = n as f64;
    let s2 = (sum_v2 / nf).max(f64::MIN_POSITIVE);
    Ok(-0.5 * nf * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0) - 0.5 * sum_log_f)
}
