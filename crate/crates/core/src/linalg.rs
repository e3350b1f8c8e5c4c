//! Small dense least-squares helpers and a banded Cholesky solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff below which a (column-scaled) design is
/// treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Result of an ordinary least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub beta: DVector<f64>,
    pub residuals: DVector<f64>,
    pub ssr: f64,
    /// `(X'X)^{-1}`, used for standard errors.
    pub xtx_inv: DMatrix<f64>,
}

/// Solves `min ||y - X b||²` through an SVD of the column-equilibrated design.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares> {
    let (n, k) = x.shape();
    if n != y.len() {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if n < k {
        return Err(Error::TooFewObservations { params: k, got: n });
    }
    if k == 0 {
        let ssr = y.norm_squared();
        return Ok(LeastSquares {
            beta: DVector::zeros(0),
            residuals: y.clone(),
            ssr,
            xtx_inv: DMatrix::zeros(0, 0),
        });
    }
    let scales: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();
    if scales.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return Err(Error::RankDeficient);
    }
    let mut xs = x.clone();
    for (j, s) in scales.iter().enumerate() {
        xs.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = xs.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    if sv.min() <= RANK_TOL * smax {
        return Err(Error::RankDeficient);
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let uty = u.transpose() * y;
    let mut beta_s = DVector::zeros(k);
    let mut cov_s = DMatrix::zeros(k, k);
    for i in 0..k {
        let vi = v_t.row(i).transpose();
        beta_s += &vi * (uty[i] / sv[i]);
        cov_s += &vi * vi.transpose() / (sv[i] * sv[i]);
    }
    let mut beta = beta_s;
    for j in 0..k {
        beta[j] /= scales[j];
    }
    let mut xtx_inv = cov_s;
    for i in 0..k {
        for j in 0..k {
            xtx_inv[(i, j)] /= scales[i] * scales[j];
        }
    }
    let residuals = y - x * &beta;
    let ssr = residuals.norm_squared();
    Ok(LeastSquares {
        beta,
        residuals,
        ssr,
        xtx_inv,
    })
}

/// Symmetric positive-definite matrix with two nonzero sub-diagonals,
/// stored by diagonals.
#[derive(Debug, Clone)]
pub struct Pentadiagonal {
    pub diag: Vec<f64>,
    pub sub1: Vec<f64>,
    pub sub2: Vec<f64>,
}

impl Pentadiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Solves `A x = b` with an in-place banded LDLᵀ factorization, O(n).
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if b.len() != n || self.sub1.len() + 1 != n.max(1) || self.sub2.len() + 2 != n.max(2) {
            return Err(Error::LengthMismatch {
                left: n,
                right: b.len(),
            });
        }
        // A = L D Lᵀ with L unit lower triangular, bandwidth 2.
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n]; // l1[i] = L[i][i-1]
        let mut l2 = vec![0.0; n]; // l2[i] = L[i][i-2]
        for i in 0..n {
            if i >= 2 {
                l2[i] = self.sub2[i - 2] / d[i - 2];
            }
            if i >= 1 {
                let mut v = self.sub1[i - 1];
                if i >= 2 {
                    v -= l2[i] * d[i - 2] * l1[i - 1];
                }
                l1[i] = v / d[i - 1];
            }
            let mut di = self.diag[i];
            if i >= 1 {
                di -= l1[i] * l1[i] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i] * l2[i] * d[i - 2];
            }
            if di <= 0.0 || !di.is_finite() {
                return Err(Error::InvalidArgument(
                    "banded matrix is not positive definite".into(),
                ));
            }
            d[i] = di;
        }
        let mut z = b.to_vec();
        for i in 0..n {
            if i >= 1 {
                z[i] -= l1[i] * z[i - 1];
            }
            if i >= 2 {
                z[i] -= l2[i] * z[i - 2];
            }
        }
        for i in 0..n {
            z[i] /= d[i];
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                z[i] -= l1[i + 1] * z[i + 1];
            }
            if i + 2 < n {
                z[i] -= l2[i + 2] * z[i + 2];
            }
        }
        Ok(z)
    }
}

/// Builds a design matrix from column slices of equal length.
pub fn design(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i])
}
