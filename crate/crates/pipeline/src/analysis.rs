//! OLS, residual diagnostics, AIC order selection, ARIMAX fits and
//! cross-group validation for the two group series.

use serde::{Deserialize, Serialize};
use trustgrid_core::{ExogSelector, Group, TrustSeries};
use trustgrid_stats::{
    acf, aic_grid, cross_validate, forecast_one_step, ols_fit, pacf, AicGrid, ArimaxFit,
    Correlogram, FitOptions, OlsFit, OneStepForecast,
};

use crate::error::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub p_values: Vec<usize>,
    pub q_values: Vec<usize>,
    pub d: usize,
    /// Regressors of the ARIMAX model. OLS always uses capability only.
    pub exog: ExogSelector,
    pub max_lag: usize,
    pub fit: FitOptions,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            p_values: (0..=4).collect(),
            q_values: (0..=4).collect(),
            d: 1,
            exog: ExogSelector::Capability,
            max_lag: 20,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostics {
    pub acf: Correlogram,
    pub pacf: Correlogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAnalysis {
    pub group: Group,
    pub series: TrustSeries,
    pub ols: Option<OlsFit>,
    pub diagnostics: Option<ResidualDiagnostics>,
    pub aic: Option<AicGrid>,
    pub arimax: Option<ArimaxFit>,
    pub forecast: Option<OneStepForecast>,
    /// Steps that failed, with the reason.
    pub gaps: Vec<String>,
}

/// Rows are the group a model was fitted on, columns the group it
/// predicts. Off-diagonal cells are cross-validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseMatrix(pub [[Option<f64>; 2]; 2]);

impl RmseMatrix {
    pub fn get(&self, fit: Group, eval: Group) -> Option<f64> {
        self.0[fit.index()][eval.index()]
    }

    pub fn is_cross(fit: Group, eval: Group) -> bool {
        fit != eval
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: AnalysisConfig,
    pub groups: [GroupAnalysis; 2],
    pub rmse: RmseMatrix,
}

impl AnalysisReport {
    pub fn group(&self, g: Group) -> &GroupAnalysis {
        &self.groups[g.index()]
    }

    /// Every table can be rendered without blanks.
    pub fn missing(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in &self.groups {
            let name = g.group;
            if g.ols.is_none() {
                out.push(format!("{name}: OLS fit"));
            }
            if g.aic.is_none() {
                out.push(format!("{name}: AIC grid"));
            }
            if g.arimax.is_none() {
                out.push(format!("{name}: ARIMAX fit"));
            }
            out.extend(g.gaps.iter().map(|gap| format!("{name}: {gap}")));
        }
        for fit in Group::ALL {
            for eval in Group::ALL {
                if !self.rmse.get(fit, eval).is_some_and(f64::is_finite) {
                    out.push(format!("RMSE of the {fit} model on {eval}"));
                }
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.missing().is_empty()
    }
}

fn analyze_group(series: &TrustSeries, cfg: &AnalysisConfig) -> GroupAnalysis {
    let mut gaps = Vec::new();
    let y = &series.values;

    let ols = ols_fit(y, &series.exog(ExogSelector::Capability), false)
        .map_err(|e| gaps.push(format!("OLS: {e}")))
        .ok();
    let diagnostics = ols.as_ref().and_then(|fit| {
        let lags = cfg.max_lag.min(fit.residuals.len().saturating_sub(1));
        match (acf(&fit.residuals, lags), pacf(&fit.residuals, lags)) {
            (Ok(acf), Ok(pacf)) => Some(ResidualDiagnostics { acf, pacf }),
            (Err(e), _) | (_, Err(e)) => {
                gaps.push(format!("residual correlogram: {e}"));
                None
            }
        }
    });

    let exog = series.exog(cfg.exog);
    let aic = aic_grid(y, &exog, &cfg.p_values, &cfg.q_values, cfg.d, &cfg.fit)
        .map_err(|e| gaps.push(format!("AIC grid: {e}")))
        .ok();
    let arimax = aic.as_ref().and_then(|grid| {
        let fit = grid.best_fit().cloned();
        if fit.is_none() {
            gaps.push("no admissible order in the AIC grid".into());
        }
        fit
    });
    let forecast = arimax.as_ref().and_then(|fit| {
        forecast_one_step(fit, y, &exog)
            .map_err(|e| gaps.push(format!("one-step forecast: {e}")))
            .ok()
    });
    if let Some(order) = arimax.as_ref().map(|f| f.order) {
        tracing::info!(group = %series.group, %order, "order selected");
    }
    GroupAnalysis {
        group: series.group,
        series: series.clone(),
        ols,
        diagnostics,
        aic,
        arimax,
        forecast,
        gaps,
    }
}

/// Runs the whole workflow on the two group series. The groups are
/// analysed concurrently; fit failures become gaps in the report rather
/// than errors.
pub fn run_analysis(
    series0: &TrustSeries,
    series1: &TrustSeries,
    cfg: &AnalysisConfig,
) -> Result<AnalysisReport, PipelineError> {
    for (s, g) in [(series0, Group::G0), (series1, Group::G1)] {
        if s.group != g {
            return Err(PipelineError::GroupMismatch {
                expected: g,
                got: s.group,
            });
        }
    }
    let (a0, a1) = rayon::join(
        || analyze_group(series0, cfg),
        || analyze_group(series1, cfg),
    );
    let groups = [a0, a1];

    let mut rmse = [[None; 2]; 2];
    for fit_g in &groups {
        let Some(fit) = &fit_g.arimax else { continue };
        for eval_g in &groups {
            let s = &eval_g.series;
            rmse[fit_g.group.index()][eval_g.group.index()] = if fit_g.group == eval_g.group {
                fit_g.forecast.as_ref().map(OneStepForecast::rmse)
            } else {
                cross_validate(fit, &s.values, &s.exog(cfg.exog)).ok()
            };
        }
    }
    Ok(AnalysisReport {
        config: cfg.clone(),
        groups,
        rmse: RmseMatrix(rmse),
    })
}
