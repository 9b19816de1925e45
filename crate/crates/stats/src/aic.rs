//! AIC order selection over a (p, q) grid at fixed differencing order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arimax::{arimax_fit, ArimaOrder, ArimaxFit, FitOptions};
use crate::error::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AicCell {
    pub order: ArimaOrder,
    pub fit: Result<ArimaxFit, String>,
}

/// Fits with an AR or MA root closer to the unit circle than this are
/// reported but never selected. Near-cancelling pairs of such roots let an
/// over-parameterised model chase a single periodogram peak.
pub const MIN_ROOT_MODULUS: f64 = 1.001;

impl AicCell {
    pub fn aic(&self) -> Option<f64> {
        self.fit.as_ref().ok().map(|f| f.aic)
    }

    /// Eligible for selection: fitted, finite AIC, roots off the unit circle.
    pub fn admissible(&self) -> bool {
        self.fit
            .as_ref()
            .is_ok_and(|f| f.aic.is_finite() && f.min_root_modulus() >= MIN_ROOT_MODULUS)
    }
}

/// Rows are p values, columns q values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AicGrid {
    pub p_values: Vec<usize>,
    pub q_values: Vec<usize>,
    pub d: usize,
    pub cells: Vec<Vec<AicCell>>,
    pub best: Option<ArimaOrder>,
}

impl AicGrid {
    pub fn aic_table(&self) -> Vec<Vec<Option<f64>>> {
        self.cells
            .iter()
            .map(|row| row.iter().map(AicCell::aic).collect())
            .collect()
    }

    pub fn get(&self, order: ArimaOrder) -> Option<&AicCell> {
        let i = self.p_values.iter().position(|&p| p == order.p)?;
        let j = self.q_values.iter().position(|&q| q == order.q)?;
        self.cells.get(i)?.get(j)
    }

    pub fn best_fit(&self) -> Option<&ArimaxFit> {
        self.best
            .and_then(|o| self.get(o))
            .and_then(|c| c.fit.as_ref().ok())
    }
}

/// Fits every (p, d, q) in the grid. Cells are independent and evaluated
/// in parallel; failures are kept as annotated gaps. The minimum AIC among
/// admissible cells wins, ties going to smaller p + q, then smaller p.
pub fn aic_grid(
    y: &[f64],
    exog: &[Vec<f64>],
    p_values: &[usize],
    q_values: &[usize],
    d: usize,
    opts: &FitOptions,
) -> Result<AicGrid, StatsError> {
    if p_values.is_empty() || q_values.is_empty() {
        return Err(StatsError::Invalid("order ranges must be nonempty".into()));
    }
    let orders: Vec<ArimaOrder> = p_values
        .iter()
        .flat_map(|&p| q_values.iter().map(move |&q| ArimaOrder::new(p, d, q)))
        .collect();
    let fitted: Vec<AicCell> = orders
        .par_iter()
        .map(|&order| AicCell {
            order,
            fit: arimax_fit(y, exog, order, opts).map_err(|e| e.to_string()),
        })
        .collect();

    let best = fitted
        .iter()
        .filter(|c| c.admissible())
        .filter_map(|c| c.aic().map(|a| (a, c.order)))
        .min_by(|(a, x), (b, y)| {
            a.total_cmp(b)
                .then((x.p + x.q).cmp(&(y.p + y.q)))
                .then(x.p.cmp(&y.p))
        })
        .map(|(_, o)| o);

    let mut it = fitted.into_iter();
    let cells = p_values
        .iter()
        .map(|_| it.by_ref().take(q_values.len()).collect())
        .collect();
    Ok(AicGrid {
        p_values: p_values.to_vec(),
        q_values: q_values.to_vec(),
        d,
        cells,
        best,
    })
}
