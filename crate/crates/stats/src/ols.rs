//! Ordinary least squares through a Householder QR factorisation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    /// Intercept first when one was requested.
    pub coefficients: Vec<f64>,
    pub stderr: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rmse: f64,
    pub sigma2: f64,
    pub df_resid: usize,
    pub r_squared: f64,
    pub intercept: bool,
}

pub(crate) fn design_matrix(x: &[Vec<f64>], intercept: bool) -> Result<DMatrix<f64>, StatsError> {
    let k = x.first().map_or(0, Vec::len);
    if let Some(bad) = x.iter().find(|r| r.len() != k) {
        return Err(StatsError::LengthMismatch {
            what: "design row",
            expected: k,
            got: bad.len(),
        });
    }
    let cols = k + usize::from(intercept);
    Ok(DMatrix::from_fn(x.len(), cols, |i, j| {
        match (intercept, j) {
            (true, 0) => 1.0,
            (true, j) => x[i][j - 1],
            (false, j) => x[i][j],
        }
    }))
}

/// Columns that lie in the span of the columns before them, found by
/// modified Gram-Schmidt with reorthogonalisation.
pub(crate) fn dependent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut bad = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm0 = col.norm();
        let mut v = col;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm0 == 0.0 || norm <= 1e-10 * norm0 {
            bad.push(j);
        } else {
            basis.push(v / norm);
        }
    }
    bad
}

/// Least-squares fit of `y` on the rows of `x`, optionally with an
/// intercept column prepended.
pub fn ols_fit(y: &[f64], x: &[Vec<f64>], intercept: bool) -> Result<OlsFit, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            what: "design matrix",
            expected: y.len(),
            got: x.len(),
        });
    }
    let xm = design_matrix(x, intercept)?;
    let (n, k) = xm.shape();
    if k == 0 {
        return Err(StatsError::Invalid("no regressors".into()));
    }
    if n < k {
        return Err(StatsError::TooShort {
            needed: k - 1,
            got: n,
        });
    }
    let bad = dependent_columns(&xm);
    if !bad.is_empty() {
        return Err(StatsError::RankDeficient { columns: bad });
    }

    let yv = DVector::from_column_slice(y);
    let qr = xm.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(StatsError::RankDeficient { columns: vec![] })?;
    let fitted = &xm * &beta;
    let resid = &yv - &fitted;
    let ssr = resid.norm_squared();
    let df = n - k;
    let sigma2 = if df > 0 { ssr / df as f64 } else { f64::NAN };

    // (X'X)^-1 = R^-1 R^-T
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(StatsError::RankDeficient { columns: vec![] })?;
    let cov_diag: Vec<f64> = (0..k).map(|i| rinv.row(i).norm_squared()).collect();
    let stderr: Vec<f64> = cov_diag.iter().map(|c| (sigma2 * c).sqrt()).collect();
    let t_values: Vec<f64> = beta.iter().zip(&stderr).map(|(b, s)| b / s).collect();
    let p_values = match StudentsT::new(0.0, 1.0, df as f64) {
        Ok(dist) if df > 0 => t_values
            .iter()
            .map(|t| {
                if t.is_finite() {
                    2.0 * (1.0 - dist.cdf(t.abs()))
                } else if t.is_nan() {
                    f64::NAN
                } else {
                    0.0
                }
            })
            .collect(),
        _ => vec![f64::NAN; k],
    };

    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        stderr,
        t_values,
        p_values,
        fitted: fitted.iter().copied().collect(),
        residuals: resid.iter().copied().collect(),
        rmse: (ssr / n as f64).sqrt(),
        sigma2,
        df_resid: df,
        r_squared: if tss > 0.0 { 1.0 - ssr / tss } else { f64::NAN },
        intercept,
    })
}
