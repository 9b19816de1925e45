//! Regression with ARIMA errors:
//!
//! ```text
//! y_t = beta' x_t + eta_t,    (1 - B)^d eta_t ~ ARMA(p, q)
//! ```
//!
//! Exogenous regressors enter in levels, so order (0, 0, 0) is exactly
//! ordinary least squares. Estimation is exact maximum likelihood on the
//! differenced data. For fixed ARMA coefficients the likelihood is
//! maximised in closed form over `beta` (generalised least squares on the
//! filtered series) and over `sigma2`; Nelder-Mead searches the remaining
//! ARMA coefficients in partial-autocorrelation coordinates, which keeps
//! every iterate stationary and invertible.
//!
//! With `d > 0`, differencing removes any component of `beta` along the
//! null space of the differenced design (for a full set of one-hot dummies,
//! a common shift of all levels). That component is pinned by requiring the
//! undifferenced residuals `y - X beta` to have zero mean.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::diff::{difference, difference_columns};
use crate::error::StatsError;
use crate::kalman::{check_params, concentrated, ArmaStateSpace};
use crate::ols::{dependent_columns, design_matrix};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::poly::{constrain_ar, constrain_ma, min_root_modulus};
use crate::rmse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q }
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Number of simplex runs; the first starts from white noise, the rest
    /// from seeded random points.
    pub restarts: usize,
    pub seed: u64,
    /// Half-width of the uniform box random starts are drawn from, in
    /// transformed coordinates.
    pub start_spread: f64,
    pub nelder_mead: NelderMeadOptions,
    /// Relative central-difference step for the observed information.
    pub hessian_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            seed: 0,
            start_spread: 1.0,
            nelder_mead: NelderMeadOptions::default(),
            hessian_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaxFit {
    pub order: ArimaOrder,
    pub beta: Vec<f64>,
    pub beta_stderr: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_stderr: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_stderr: Vec<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    /// Estimated parameters counted by the AIC: p + q + |beta| + 1.
    pub n_params: usize,
    /// Observations entering the likelihood (n - d).
    pub n_obs: usize,
    /// One-step-ahead prediction errors, aligned with `y[d..]`.
    pub residuals: Vec<f64>,
    pub one_step_rmse: f64,
    /// False when the best simplex run hit its evaluation budget.
    pub converged: bool,
    /// False when differencing left part of `beta` unidentified and the
    /// zero-mean convention was used to fix it.
    pub beta_identified: bool,
    pub evals: usize,
}

impl ArimaxFit {
    /// Smallest root modulus over the AR and MA polynomials. Values near 1
    /// flag a fit on the edge of the stationary or invertible region.
    pub fn min_root_modulus(&self) -> f64 {
        let neg: Vec<f64> = self.theta.iter().map(|t| -t).collect();
        min_root_modulus(&self.phi).min(min_root_modulus(&neg))
    }
}

/// Filtered one-step-ahead predictions on the undifferenced scale:
/// `predicted[i]` forecasts `y[start + i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneStepForecast {
    pub start: usize,
    pub predicted: Vec<f64>,
    pub errors: Vec<f64>,
}

impl OneStepForecast {
    pub fn rmse(&self) -> f64 {
        rmse(&self.errors)
    }
}

struct Problem {
    y: Vec<f64>,
    x: Vec<Vec<f64>>,
    yd: Vec<f64>,
    /// differenced regressors, column-major
    xd_cols: Vec<Vec<f64>>,
    order: ArimaOrder,
    k: usize,
}

struct Profile {
    beta: Vec<f64>,
    v: Vec<f64>,
    loglik: f64,
    sigma2: f64,
}

fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.is_empty() {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let tol = svd.singular_values.max() * 1e-10 * (a.nrows().max(a.ncols()) as f64);
    svd.solve(b, tol)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.is_empty() {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let tol = svd.singular_values.max() * 1e-10 * (a.nrows().max(a.ncols()) as f64);
    svd.pseudo_inverse(tol)
        .unwrap_or_else(|_| DMatrix::zeros(a.ncols(), a.nrows()))
}

impl Problem {
    fn new(y: &[f64], x: &[Vec<f64>], order: ArimaOrder) -> Result<Self, StatsError> {
        if x.len() != y.len() {
            return Err(StatsError::LengthMismatch {
                what: "exogenous rows",
                expected: y.len(),
                got: x.len(),
            });
        }
        let k = x.first().map_or(0, Vec::len);
        let needed = order.p + order.q + order.d + k + 5;
        if y.len() <= needed {
            return Err(StatsError::TooShort {
                needed,
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::Invalid(
                "series contains non-finite values".into(),
            ));
        }
        if k > 0 {
            let xm = design_matrix(x, false)?;
            let bad = dependent_columns(&xm);
            if !bad.is_empty() {
                return Err(StatsError::RankDeficient { columns: bad });
            }
        }
        let yd = difference(y, order.d)?;
        let xd = difference_columns(x, order.d);
        let xd_cols = (0..k).map(|j| xd.iter().map(|r| r[j]).collect()).collect();
        Ok(Self {
            y: y.to_vec(),
            x: x.to_vec(),
            yd,
            xd_cols,
            order,
            k,
        })
    }

    fn split(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = u.split_at(self.order.p);
        (constrain_ar(a), constrain_ma(b))
    }

    /// Likelihood maximised over beta and sigma2 for fixed ARMA
    /// coefficients.
    fn profile(&self, phi: &[f64], theta: &[f64]) -> Result<Profile, StatsError> {
        let gains = ArmaStateSpace::new(phi, theta).gains(self.yd.len())?;
        let vy = gains.innovations(&self.yd);
        let vx: Vec<Vec<f64>> = self.xd_cols.iter().map(|c| gains.innovations(c)).collect();
        let beta = if self.k == 0 {
            Vec::new()
        } else {
            let w: Vec<f64> = gains.f.iter().map(|f| 1.0 / f.sqrt()).collect();
            let a = DMatrix::from_fn(vy.len(), self.k, |i, j| vx[j][i] * w[i]);
            let b = DVector::from_iterator(vy.len(), vy.iter().zip(&w).map(|(v, w)| v * w));
            pinv_solve(&a, &b).iter().copied().collect()
        };
        let v: Vec<f64> = (0..vy.len())
            .map(|i| vy[i] - vx.iter().zip(&beta).map(|(c, b)| c[i] * b).sum::<f64>())
            .collect();
        let (loglik, sigma2) = concentrated(&v, &gains);
        Ok(Profile {
            beta,
            v,
            loglik,
            sigma2,
        })
    }

    /// Concentrated log-likelihood at explicit (beta, phi, theta).
    fn loglik_at(&self, beta: &[f64], phi: &[f64], theta: &[f64]) -> Result<f64, StatsError> {
        check_params(phi, theta)?;
        let gains = ArmaStateSpace::new(phi, theta).gains(self.yd.len())?;
        let resid: Vec<f64> = (0..self.yd.len())
            .map(|i| {
                self.yd[i]
                    - self
                        .xd_cols
                        .iter()
                        .zip(beta)
                        .map(|(c, b)| c[i] * b)
                        .sum::<f64>()
            })
            .collect();
        let v = gains.innovations(&resid);
        Ok(concentrated(&v, &gains).0)
    }

    fn innovations_at(
        &self,
        beta: &[f64],
        phi: &[f64],
        theta: &[f64],
    ) -> Result<Vec<f64>, StatsError> {
        let gains = ArmaStateSpace::new(phi, theta).gains(self.yd.len())?;
        let resid: Vec<f64> = (0..self.yd.len())
            .map(|i| {
                self.yd[i]
                    - self
                        .xd_cols
                        .iter()
                        .zip(beta)
                        .map(|(c, b)| c[i] * b)
                        .sum::<f64>()
            })
            .collect();
        Ok(gains.innovations(&resid))
    }

    /// Moves beta along the null space of the differenced design so the
    /// level residuals have zero mean. Returns whether beta was already
    /// identified.
    /// Orthonormal directions of beta that differencing removes.
    fn level_null_space(&self) -> Vec<DVector<f64>> {
        if self.k == 0 || self.order.d == 0 {
            return Vec::new();
        }
        let xd = DMatrix::from_fn(self.yd.len(), self.k, |i, j| self.xd_cols[j][i]);
        let svd = xd.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.max();
        svd.singular_values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s <= smax * 1e-10 * self.yd.len() as f64)
            .map(|(i, _)| vt.row(i).transpose().into_owned())
            .collect()
    }

    fn pin_level(&self, beta: &mut [f64]) -> bool {
        let null = self.level_null_space();
        if null.is_empty() {
            return true;
        }
        let n = self.y.len() as f64;
        let col_means: Vec<f64> = (0..self.k)
            .map(|j| self.x.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let resid_mean = (0..self.y.len())
            .map(|i| {
                self.y[i]
                    - self.x[i]
                        .iter()
                        .zip(beta.iter())
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .sum::<f64>()
            / n;
        let m = DVector::from_vec(col_means);
        let a = DMatrix::from_fn(1, null.len(), |_, j| m.dot(&null[j]));
        let c = pinv_solve(&a, &DVector::from_element(1, resid_mean));
        for (j, nv) in null.iter().enumerate() {
            for (b, x) in beta.iter_mut().zip(nv.iter()) {
                *b += c[j] * x;
            }
        }
        false
    }

    /// Standard errors from the inverse observed information, by central
    /// differences of the concentrated log-likelihood. NaN when a probe
    /// leaves the admissible region.
    fn stderrs(&self, beta: &[f64], phi: &[f64], theta: &[f64], step: f64) -> Vec<f64> {
        let x0: Vec<f64> = beta.iter().chain(phi).chain(theta).copied().collect();
        let m = x0.len();
        let (k, p) = (self.k, self.order.p);
        let f = |x: &[f64]| self.loglik_at(&x[..k], &x[k..k + p], &x[k + p..]);
        let h: Vec<f64> = x0.iter().map(|v| step * v.abs().max(1.0)).collect();
        let Ok(f0) = f(&x0) else {
            return vec![f64::NAN; m];
        };
        let mut hess = DMatrix::zeros(m, m);
        let shifted = |d: &[(usize, f64)]| {
            let mut x = x0.clone();
            for &(i, s) in d {
                x[i] += s * h[i];
            }
            f(&x)
        };
        for i in 0..m {
            let (Ok(fp), Ok(fm)) = (shifted(&[(i, 1.0)]), shifted(&[(i, -1.0)])) else {
                return vec![f64::NAN; m];
            };
            hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
            for j in 0..i {
                let vals = [
                    shifted(&[(i, 1.0), (j, 1.0)]),
                    shifted(&[(i, 1.0), (j, -1.0)]),
                    shifted(&[(i, -1.0), (j, 1.0)]),
                    shifted(&[(i, -1.0), (j, -1.0)]),
                ];
                let [Ok(pp), Ok(pm), Ok(mp), Ok(mm)] = vals else {
                    return vec![f64::NAN; m];
                };
                let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        // the likelihood is flat along unidentified level directions; drop
        // them exactly so finite-difference noise cannot leak in
        let mut proj = DMatrix::identity(m, m);
        for nv in self.level_null_space() {
            let full = DVector::from_fn(m, |i, _| if i < k { nv[i] } else { 0.0 });
            proj -= &full * full.transpose();
        }
        let hess = &proj * hess * &proj;
        let cov = pinv(&(-hess));
        (0..m)
            .map(|i| {
                if cov[(i, i)] >= 0.0 {
                    cov[(i, i)].sqrt()
                } else {
                    f64::NAN
                }
            })
            .collect()
    }
}

fn start_points(dim: usize, opts: &FitOptions, order: ArimaOrder) -> Vec<Vec<f64>> {
    let seed = opts.seed
        ^ ((order.p as u64) << 16 | (order.d as u64) << 8 | order.q as u64)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![vec![0.0; dim]];
    for _ in 1..opts.restarts.max(1) {
        starts.push(
            (0..dim)
                .map(|_| rng.random_range(-opts.start_spread..=opts.start_spread))
                .collect(),
        );
    }
    starts
}

/// Fits regression with ARIMA(p, d, q) errors of `y` on the rows of `exog`
/// (no intercept is added).
pub fn arimax_fit(
    y: &[f64],
    exog: &[Vec<f64>],
    order: ArimaOrder,
    opts: &FitOptions,
) -> Result<ArimaxFit, StatsError> {
    let prob = Problem::new(y, exog, order)?;
    let dim = order.p + order.q;

    let objective = |u: &[f64]| {
        let (phi, theta) = prob.split(u);
        prob.profile(&phi, &theta)
            .map_or(f64::INFINITY, |pr| -pr.loglik)
    };

    let mut best: Option<crate::optim::Minimum> = None;
    let mut evals = 0;
    for x0 in start_points(dim, opts, order) {
        let m = nelder_mead(objective, &x0, &opts.nelder_mead);
        evals += m.evals;
        if best.as_ref().is_none_or(|b| m.fx < b.fx) {
            best = Some(m);
        }
        if dim == 0 {
            break;
        }
    }
    let best = best.expect("at least one start");
    if !best.fx.is_finite() {
        return Err(StatsError::Degenerate(
            "likelihood is not finite anywhere the optimiser looked",
        ));
    }

    let (phi, theta) = prob.split(&best.x);
    let profile = prob.profile(&phi, &theta)?;
    let mut beta = profile.beta.clone();
    let identified = prob.pin_level(&mut beta);
    let residuals = if identified {
        profile.v.clone()
    } else {
        prob.innovations_at(&beta, &phi, &theta)?
    };

    let se = prob.stderrs(&beta, &phi, &theta, opts.hessian_step);
    let (k, p) = (prob.k, order.p);
    let n_params = order.p + order.q + k + 1;
    Ok(ArimaxFit {
        order,
        beta_stderr: se[..k].to_vec(),
        phi_stderr: se[k..k + p].to_vec(),
        theta_stderr: se[k + p..].to_vec(),
        beta,
        phi,
        theta,
        sigma2: profile.sigma2,
        loglik: profile.loglik,
        aic: 2.0 * n_params as f64 - 2.0 * profile.loglik,
        n_params,
        n_obs: prob.yd.len(),
        one_step_rmse: rmse(&residuals),
        residuals,
        converged: best.converged,
        beta_identified: identified,
        evals,
    })
}

/// Applies `fit`'s parameters unchanged to (`y`, `exog`).
pub fn forecast_one_step(
    fit: &ArimaxFit,
    y: &[f64],
    exog: &[Vec<f64>],
) -> Result<OneStepForecast, StatsError> {
    if exog.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            what: "exogenous rows",
            expected: y.len(),
            got: exog.len(),
        });
    }
    if let Some(bad) = exog.iter().find(|r| r.len() != fit.beta.len()) {
        return Err(StatsError::LengthMismatch {
            what: "exogenous columns",
            expected: fit.beta.len(),
            got: bad.len(),
        });
    }
    check_params(&fit.phi, &fit.theta)?;
    let d = fit.order.d;
    let yd = difference(y, d)?;
    let xd = difference_columns(exog, d);
    let resid: Vec<f64> = yd
        .iter()
        .zip(&xd)
        .map(|(v, row)| v - row.iter().zip(&fit.beta).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let gains = ArmaStateSpace::new(&fit.phi, &fit.theta).gains(resid.len())?;
    let errors = gains.innovations(&resid);
    let predicted = errors
        .iter()
        .enumerate()
        .map(|(i, e)| y[i + d] - e)
        .collect();
    Ok(OneStepForecast {
        start: d,
        predicted,
        errors,
    })
}

/// One-step prediction RMSE of `fit` applied to another series.
pub fn cross_validate(fit: &ArimaxFit, y: &[f64], exog: &[Vec<f64>]) -> Result<f64, StatsError> {
    Ok(forecast_one_step(fit, y, exog)?.rmse())
}
