//! Sample autocorrelation and partial autocorrelation.

use serde::{Deserialize, Serialize};

use crate::error::StatsError;

/// Correlations at lags `0..=max_lag` with the white-noise band
/// `±1.96/√n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlogram {
    pub values: Vec<f64>,
    pub band: f64,
    pub n: usize,
}

impl Correlogram {
    /// Lags (≥ 1) whose magnitude exceeds the band.
    pub fn significant_lags(&self) -> Vec<usize> {
        (1..self.values.len())
            .filter(|&k| self.values[k].abs() > self.band)
            .collect()
    }
}

fn check(y: &[f64], max_lag: usize) -> Result<(), StatsError> {
    if y.len() <= max_lag {
        return Err(StatsError::TooShort {
            needed: max_lag,
            got: y.len(),
        });
    }
    Ok(())
}

/// Biased (divide-by-n) sample autocorrelations.
pub fn acf(y: &[f64], max_lag: usize) -> Result<Correlogram, StatsError> {
    check(y, max_lag)?;
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum();
    let scale: f64 = y.iter().map(|v| v * v).sum();
    if !(c0 > 1e-24 * scale) {
        return Err(StatsError::Degenerate("series has zero variance"));
    }
    let values = (0..=max_lag)
        .map(|k| {
            dev[..n - k]
                .iter()
                .zip(&dev[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / c0
        })
        .collect();
    Ok(Correlogram {
        values,
        band: 1.96 / (n as f64).sqrt(),
        n,
    })
}

/// Durbin-Levinson recursion: partial autocorrelations from
/// autocorrelations `rho[0..=m]` (with `rho[0] == 1`). Returns
/// `pacf[0..=m]` with `pacf[0] == 1`.
pub fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let m = rho.len().saturating_sub(1);
    let mut out = vec![1.0; m + 1];
    let mut phi: Vec<f64> = Vec::with_capacity(m);
    let mut v = 1.0;
    for k in 1..=m {
        let num = rho[k]
            - phi
                .iter()
                .enumerate()
                .map(|(j, p)| p * rho[k - 1 - j])
                .sum::<f64>();
        let a = if v > 0.0 { num / v } else { 0.0 };
        let prev = phi.clone();
        for j in 0..phi.len() {
            phi[j] = prev[j] - a * prev[prev.len() - 1 - j];
        }
        phi.push(a);
        v *= 1.0 - a * a;
        out[k] = a;
    }
    out
}

pub fn pacf(y: &[f64], max_lag: usize) -> Result<Correlogram, StatsError> {
    let a = acf(y, max_lag)?;
    Ok(Correlogram {
        values: durbin_levinson(&a.values),
        band: a.band,
        n: a.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn ar(coeffs: &[f64], n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let burn = 500;
        let mut y = vec![0.0; n + burn];
        for t in 0..n + burn {
            let e: f64 = StandardNormal.sample(&mut rng);
            y[t] = e + coeffs
                .iter()
                .enumerate()
                .filter(|(i, _)| t > *i)
                .map(|(i, c)| c * y[t - 1 - i])
                .sum::<f64>();
        }
        y.split_off(burn)
    }

    #[test]
    fn lag_zero_is_one() {
        let a = acf(&[1.0, 3.0, 2.0, 5.0, 4.0], 3).unwrap();
        assert_eq!(a.values[0], 1.0);
    }

    #[test]
    fn alternating_sign() {
        let y: Vec<f64> = (0..400)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let a = acf(&y, 2).unwrap();
        assert!((a.values[1] + 1.0).abs() < 0.01);
    }

    #[test]
    fn degenerate_rejected() {
        assert_eq!(
            acf(&[2.0; 10], 2),
            Err(StatsError::Degenerate("series has zero variance"))
        );
        assert!(acf(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn ar1_acf_decays_geometrically() {
        let y = ar(&[0.8], 10_000, 1);
        let a = acf(&y, 5).unwrap();
        for k in 1..=5 {
            assert!(
                (a.values[k] - 0.8f64.powi(k as i32)).abs() < 0.03,
                "lag {k}: {}",
                a.values[k]
            );
        }
    }

    #[test]
    fn ar1_pacf_cuts_off() {
        let y = ar(&[0.8], 10_000, 2);
        let p = pacf(&y, 6).unwrap();
        assert!((p.values[1] - 0.8).abs() < 0.03);
        for k in 2..=6 {
            assert!(p.values[k].abs() < p.band * 1.5, "lag {k}: {}", p.values[k]);
        }
    }

    #[test]
    fn ar2_second_partial() {
        let y = ar(&[0.4, 0.3], 10_000, 3);
        let p = pacf(&y, 3).unwrap();
        assert!((p.values[2] - 0.3).abs() < 0.03, "{}", p.values[2]);
    }

    #[test]
    fn white_noise_inside_band() {
        let mut inside = 0;
        for seed in 0..40 {
            let y = ar(&[], 500, 100 + seed);
            let p = pacf(&y, 1).unwrap();
            if p.values[1].abs() <= p.band {
                inside += 1;
            }
        }
        assert!(inside >= 36, "{inside}/40");
    }

    #[test]
    fn durbin_levinson_on_exact_ar1() {
        let rho: Vec<f64> = (0..6).map(|k| 0.5f64.powi(k)).collect();
        let p = durbin_levinson(&rho);
        assert!((p[1] - 0.5).abs() < 1e-14);
        assert!(p[2..].iter().all(|v| v.abs() < 1e-14));
    }
}
