//! Lag-polynomial utilities and the partial-autocorrelation
//! reparameterisation that keeps AR polynomials stationary and MA
//! polynomials invertible during optimisation.
//!
//! Conventions: AR coefficients `phi` describe `1 - phi_1 B - ... - phi_p B^p`,
//! MA coefficients `theta` describe `1 + theta_1 B + ... + theta_q B^q`.

/// Levinson step-up: reflection coefficients in (-1, 1) to the
/// coefficients of a stationary AR polynomial.
pub fn reflections_to_ar(r: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = Vec::with_capacity(r.len());
    for &rk in r {
        let prev = a.clone();
        for j in 0..prev.len() {
            a[j] = prev[j] - rk * prev[prev.len() - 1 - j];
        }
        a.push(rk);
    }
    a
}

/// Levinson step-down. `None` when some reflection coefficient has
/// magnitude ≥ 1, i.e. the polynomial has a root on or inside the unit
/// circle.
pub fn ar_to_reflections(phi: &[f64]) -> Option<Vec<f64>> {
    let mut a = phi.to_vec();
    let mut r = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let rk = a[k];
        if !rk.is_finite() || rk.abs() >= 1.0 {
            return None;
        }
        r[k] = rk;
        let denom = 1.0 - rk * rk;
        let prev = a.clone();
        for j in 0..k {
            a[j] = (prev[j] + rk * prev[k - 1 - j]) / denom;
        }
        a.truncate(k);
    }
    Some(r)
}

pub fn is_stationary(phi: &[f64]) -> bool {
    ar_to_reflections(phi).is_some()
}

pub fn is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    ar_to_reflections(&neg).is_some()
}

/// Smallest modulus among the roots of `1 - phi_1 z - ... - phi_p z^p`,
/// from the eigenvalues of the companion matrix (the inverse roots).
/// Infinite for an empty polynomial.
pub fn min_root_modulus(phi: &[f64]) -> f64 {
    let p = phi.len();
    if p == 0 {
        return f64::INFINITY;
    }
    let companion = nalgebra::DMatrix::from_fn(p, p, |i, j| {
        if i == 0 {
            phi[j]
        } else {
            f64::from(u8::from(i == j + 1))
        }
    });
    let largest = companion
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    1.0 / largest
}

/// Unconstrained reals to stationary AR coefficients.
pub fn constrain_ar(u: &[f64]) -> Vec<f64> {
    let r: Vec<f64> = u.iter().map(|v| v.tanh()).collect();
    reflections_to_ar(&r)
}

/// Unconstrained reals to invertible MA coefficients.
pub fn constrain_ma(u: &[f64]) -> Vec<f64> {
    constrain_ar(u).into_iter().map(|a| -a).collect()
}

pub fn unconstrain_ar(phi: &[f64]) -> Option<Vec<f64>> {
    ar_to_reflections(phi).map(|r| r.into_iter().map(f64::atanh).collect())
}

pub fn unconstrain_ma(theta: &[f64]) -> Option<Vec<f64>> {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    unconstrain_ar(&neg)
}

/// Coefficients of the MA(∞) representation, `psi_0 = 1`.
pub fn psi_weights(phi: &[f64], theta: &[f64], n: usize) -> Vec<f64> {
    let mut psi = vec![0.0; n];
    if n == 0 {
        return psi;
    }
    psi[0] = 1.0;
    for j in 1..n {
        let mut v = theta.get(j - 1).copied().unwrap_or(0.0);
        for (i, p) in phi.iter().enumerate() {
            if j > i {
                v += p * psi[j - 1 - i];
            }
        }
        psi[j] = v;
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_modulus_of_known_polynomials() {
        // 1 - 0.5z has its root at 2
        assert!((min_root_modulus(&[0.5]) - 2.0).abs() < 1e-12);
        // 1 - 0.25z^2 has roots at +-2
        assert!((min_root_modulus(&[0.0, 0.25]) - 2.0).abs() < 1e-12);
        // complex pair with modulus 1/sqrt(0.81)
        assert!((min_root_modulus(&[0.0, -0.81]) - 1.0 / 0.9).abs() < 1e-12);
        assert_eq!(min_root_modulus(&[]), f64::INFINITY);
        assert!(min_root_modulus(&[1.0]) <= 1.0 + 1e-12);
    }
    use proptest::prelude::*;

    #[test]
    fn known_stationarity() {
        assert!(is_stationary(&[0.5]));
        assert!(!is_stationary(&[1.0]));
        assert!(!is_stationary(&[-1.2]));
        assert!(is_stationary(&[0.5, 0.3]));
        assert!(!is_stationary(&[0.5, 0.6]));
        assert!(is_stationary(&[]));
        assert!(is_invertible(&[0.9]));
        assert!(!is_invertible(&[1.1]));
        // 1 + 2.5B + B^2 = (1 + 2B)(1 + 0.5B)
        assert!(!is_invertible(&[2.5, 1.0]));
    }

    #[test]
    fn ar2_roots_check() {
        // 1 - 1.5B + 0.56B^2 = (1 - 0.7B)(1 - 0.8B), stationary
        assert!(is_stationary(&[1.5, -0.56]));
        // (1 - 0.7B)(1 - 1.1B)
        assert!(!is_stationary(&[1.8, -0.77]));
    }

    #[test]
    fn psi_of_ar1() {
        let psi = psi_weights(&[0.5], &[], 5);
        assert_eq!(psi, vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
        let psi = psi_weights(&[], &[0.3, -0.2], 4);
        assert_eq!(psi, vec![1.0, 0.3, -0.2, 0.0]);
    }

    proptest! {
        #[test]
        fn constrained_values_are_valid(u in proptest::collection::vec(-4.0f64..4.0, 0..6)) {
            prop_assert!(is_stationary(&constrain_ar(&u)));
            prop_assert!(is_invertible(&constrain_ma(&u)));
        }

        #[test]
        fn transform_round_trips(u in proptest::collection::vec(-3.0f64..3.0, 0..6)) {
            let phi = constrain_ar(&u);
            let back = unconstrain_ar(&phi).unwrap();
            for (a, b) in u.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }
    }
}
