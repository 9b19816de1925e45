//! Time-series estimation for short, regularly sampled trust series.
//!
//! The stack is self-contained: ordinary least squares with categorical
//! regressors, differencing, sample ACF/PACF, the exact Gaussian likelihood
//! of ARMA processes via a state-space prediction-error decomposition, and
//! regression with ARIMA errors fitted by multistart Nelder-Mead.

pub mod acf;
pub mod aic;
pub mod arimax;
pub mod diff;
pub mod error;
pub mod kalman;
pub mod ols;
pub mod optim;
pub mod poly;

pub use acf::{acf, pacf, Correlogram};
pub use aic::{aic_grid, AicGrid};
pub use arimax::{
    arimax_fit, cross_validate, forecast_one_step, ArimaOrder, ArimaxFit, FitOptions,
    OneStepForecast,
};
pub use diff::difference;
pub use error::StatsError;
pub use kalman::arma_loglik;
pub use ols::{ols_fit, OlsFit};
pub use optim::{nelder_mead, Minimum, NelderMeadOptions};

pub(crate) fn rmse(errors: &[f64]) -> f64 {
    if errors.is_empty() {
        return f64::NAN;
    }
    (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
}
