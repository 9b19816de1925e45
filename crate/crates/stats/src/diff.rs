use crate::error::StatsError;

/// Applies `d` rounds of first differencing. The result has `len - d`
/// values.
pub fn difference(y: &[f64], d: usize) -> Result<Vec<f64>, StatsError> {
    if y.len() <= d {
        return Err(StatsError::TooShort {
            needed: d,
            got: y.len(),
        });
    }
    let mut out = y.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

pub(crate) fn difference_columns(rows: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let mut out = rows.to_vec();
    for _ in 0..d {
        out = out
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect())
            .collect();
    }
    out
}
