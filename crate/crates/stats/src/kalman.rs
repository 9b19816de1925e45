//! Exact Gaussian likelihood of a zero-mean ARMA(p, q) process through the
//! prediction-error decomposition of its state-space form.
//!
//! State dimension is `r = max(p, q + 1)`:
//!
//! ```text
//! y_t      = [1 0 ... 0] a_t
//! a_{t+1}  = T a_t + R e_{t+1},   T = [phi | I; 0],  R = [1, theta_1, ..., theta_{r-1}]'
//! ```
//!
//! The filter starts from the stationary covariance, obtained by solving
//! `vec(P) = (I - T⊗T)^{-1} vec(R R')`. It runs with unit innovation
//! variance; `v_t` are the one-step prediction errors and `F_t` their
//! variances in units of `sigma2`.

use nalgebra::{DMatrix, DVector};

use crate::error::StatsError;
use crate::poly::{is_invertible, is_stationary};

const F_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct ArmaStateSpace {
    r: usize,
    phi: Vec<f64>,
    rvec: Vec<f64>,
}

impl ArmaStateSpace {
    pub(crate) fn new(phi: &[f64], theta: &[f64]) -> Self {
        let r = phi.len().max(theta.len() + 1);
        let mut p = phi.to_vec();
        p.resize(r, 0.0);
        let mut rvec = vec![1.0];
        rvec.extend_from_slice(theta);
        rvec.resize(r, 0.0);
        Self { r, phi: p, rvec }
    }

    fn transition(&self) -> DMatrix<f64> {
        let r = self.r;
        DMatrix::from_fn(r, r, |i, j| {
            if j == 0 {
                self.phi[i]
            } else if j == i + 1 {
                1.0
            } else {
                0.0
            }
        })
    }

    pub(crate) fn stationary_cov(&self) -> Result<DMatrix<f64>, StatsError> {
        let r = self.r;
        let t = self.transition();
        let rr = DVector::from_column_slice(&self.rvec);
        let q = &rr * rr.transpose();
        let tt = t.kronecker(&t);
        let lhs = DMatrix::identity(r * r, r * r) - tt;
        let rhs = DVector::from_iterator(r * r, q.iter().copied());
        let sol = lhs.lu().solve(&rhs).ok_or(StatsError::Nonstationary)?;
        let p = DMatrix::from_column_slice(r, r, sol.as_slice());
        Ok((&p + p.transpose()) * 0.5)
    }

    /// Time-varying gains and prediction-error variances for a series of
    /// length `n`. They do not depend on the data, so several series can
    /// share one pass.
    pub(crate) fn gains(&self, n: usize) -> Result<Gains, StatsError> {
        let r = self.r;
        let t = self.transition();
        let rr = DVector::from_column_slice(&self.rvec);
        let q = &rr * rr.transpose();
        let mut p = self.stationary_cov()?;
        let mut f = Vec::with_capacity(n);
        let mut k = Vec::with_capacity(n * r);
        let mut steady = false;
        let mut steady_k = vec![0.0; r];
        for _ in 0..n {
            if steady {
                f.push(1.0);
                k.extend_from_slice(&steady_k);
                continue;
            }
            let ft = p[(0, 0)];
            if !(ft > F_FLOOR) {
                return Err(StatsError::Degenerate(
                    "prediction-error variance collapsed",
                ));
            }
            let tp0 = &t * p.column(0);
            let kt = tp0 / ft;
            f.push(ft);
            k.extend(kt.iter().copied());
            p = &t * &p * t.transpose() + &q - &kt * kt.transpose() * ft;
            if (ft - 1.0).abs() < 1e-15 {
                steady = true;
                steady_k.copy_from_slice(kt.as_slice());
            }
        }
        Ok(Gains {
            r,
            phi: self.phi.clone(),
            f,
            k,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Gains {
    r: usize,
    phi: Vec<f64>,
    pub(crate) f: Vec<f64>,
    k: Vec<f64>,
}

impl Gains {
    /// One-step prediction errors of `y`.
    pub(crate) fn innovations(&self, y: &[f64]) -> Vec<f64> {
        let r = self.r;
        let mut a = vec![0.0; r];
        let mut next = vec![0.0; r];
        let mut v = Vec::with_capacity(y.len());
        for (t, &yt) in y.iter().enumerate() {
            let vt = yt - a[0];
            let kt = &self.k[t * r..(t + 1) * r];
            for i in 0..r {
                let shift = if i + 1 < r { a[i + 1] } else { 0.0 };
                next[i] = self.phi[i] * a[0] + shift + kt[i] * vt;
            }
            std::mem::swap(&mut a, &mut next);
            v.push(vt);
        }
        v
    }

    pub(crate) fn sum_log_f(&self) -> f64 {
        self.f.iter().map(|f| f.ln()).sum()
    }
}

pub(crate) fn check_params(phi: &[f64], theta: &[f64]) -> Result<(), StatsError> {
    if phi.iter().chain(theta).any(|c| !c.is_finite()) {
        return Err(StatsError::Invalid("non-finite coefficient".into()));
    }
    if !is_stationary(phi) {
        return Err(StatsError::Nonstationary);
    }
    if !is_invertible(theta) {
        return Err(StatsError::NonInvertible);
    }
    Ok(())
}

/// Exact log-likelihood of zero-mean `y` under ARMA(`phi`, `theta`) with
/// innovation variance `sigma2`.
pub fn arma_loglik(y: &[f64], phi: &[f64], theta: &[f64], sigma2: f64) -> Result<f64, StatsError> {
    check_params(phi, theta)?;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(StatsError::Invalid(format!(
            "sigma2 must be positive, got {sigma2}"
        )));
    }
    let gains = ArmaStateSpace::new(phi, theta).gains(y.len())?;
    let v = gains.innovations(y);
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    Ok(v.iter()
        .zip(&gains.f)
        .map(|(vt, ft)| -0.5 * (ln2pi + (sigma2 * ft).ln() + vt * vt / (sigma2 * ft)))
        .sum())
}

/// Log-likelihood with `sigma2` replaced by its maximiser
/// `sum(v^2 / F) / n`. Returns `(loglik, sigma2_hat)`.
pub(crate) fn concentrated(v: &[f64], gains: &Gains) -> (f64, f64) {
    let n = v.len() as f64;
    let s: f64 = v.iter().zip(&gains.f).map(|(vt, ft)| vt * vt / ft).sum();
    let sigma2 = s / n;
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    (
        -0.5 * n * (ln2pi + 1.0 + sigma2.ln()) - 0.5 * gains.sum_log_f(),
        sigma2,
    )
}
