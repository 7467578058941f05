//! Standard normal helpers.
//!
//! The Gaussian closed forms are written in terms of the standard normal
//! quantile `z(q) = √2·erfinv(2q − 1)`, its density and the partial moments
//! `∫ z dq = −φ(z)` and `∫ z² dq = q − z·φ(z)`.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal quantile; returns ±∞ at the endpoints.
pub fn normal_quantile(q: f64) -> f64 {
    if q <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if q >= 1.0 {
        return f64::INFINITY;
    }
    -SQRT_2 * erfc_inv(2.0 * q)
}

/// `z·φ(z)`, taken as zero at ±∞.
pub fn z_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else {
        z * normal_pdf(z)
    }
}

/// `∫_{q0}^{q1} z(q) dq` for the standard normal quantile `z`.
pub fn quantile_first_moment(q0: f64, q1: f64) -> f64 {
    normal_pdf(normal_quantile(q0)) - normal_pdf(normal_quantile(q1))
}

/// `∫_{q0}^{q1} z(q)² dq`.
pub fn quantile_second_moment(q0: f64, q1: f64) -> f64 {
    let (z0, z1) = (normal_quantile(q0), normal_quantile(q1));
    ((q1 - q0) - (z_pdf(z1) - z_pdf(z0))).max(0.0)
}

/// Weights `c_i = ∫_{(i-1)/n}^{i/n} z(q) dq` for `i = 1..=n`.
pub fn gaussian_piece_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let dens: Vec<f64> = (0..=n)
        .map(|i| normal_pdf(normal_quantile(i as f64 / nf)))
        .collect();
    dens.windows(2).map(|w| w[0] - w[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_inverts_cdf() {
        for &q in &[1e-10, 1e-3, 0.1, 0.5, 0.77, 0.999] {
            let z = normal_quantile(q);
            let err = (normal_cdf(z) - q).abs() / q;
            assert!(err <= 1e-10, "q={q} rel={err:e}");
        }
        assert_eq!(normal_quantile(0.5), 0.0);
    }

    #[test]
    fn full_moments() {
        assert!(quantile_first_moment(0.0, 1.0).abs() < 1e-15);
        assert!((quantile_second_moment(0.0, 1.0) - 1.0).abs() < 1e-15);
        let w = gaussian_piece_weights(2);
        assert!((w[0] + INV_SQRT_2PI).abs() < 1e-15);
        assert!((w[1] - INV_SQRT_2PI).abs() < 1e-15);
    }

    #[test]
    fn second_moment_matches_midpoint_rule() {
        let (q0, q1) = (0.2, 0.45);
        let steps = 200_000;
        let h = (q1 - q0) / steps as f64;
        let dense: f64 = (0..steps)
            .map(|i| normal_quantile(q0 + (i as f64 + 0.5) * h).powi(2) * h)
            .sum();
        assert!((dense - quantile_second_moment(q0, q1)).abs() < 1e-10);
    }
}
