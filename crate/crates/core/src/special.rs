//! Gamma-function constants shared by every formula.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{ensure, Error, Result};

/// Surface measure of the unit sphere `S^{n-1}`, `2π^{n/2}/Γ(n/2)`.
///
/// `n = 1` gives the counting measure of `{-1, 1}`, i.e. 2.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1, "sphere_area needs n >= 1");
    let h = n as f64 / 2.0;
    (std::f64::consts::LN_2 + h * PI.ln() - ln_gamma(h)).exp()
}

/// Volume of the unit ball in `R^n`, `ω_{n-1}/n`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Riesz coefficient `c_d = Γ((n-d)/2) / (2^d π^{n/2} Γ(d/2))`.
pub fn riesz_c_d(n: usize, d: f64) -> Result<f64> {
    let nf = n as f64;
    ensure(n >= 1 && d > 0.0 && d < nf && d.is_finite(), || {
        Error::Domain(format!("riesz_c_d needs 0 < d < n, got n={n}, d={d}"))
    })?;
    let ln = ln_gamma((nf - d) / 2.0) - d * std::f64::consts::LN_2 - nf / 2.0 * PI.ln() - ln_gamma(d / 2.0);
    Ok(ln.exp())
}

/// `∫_{R^m} exp(-|x|^p) dx = 2π^{m/2} Γ(1+m/p) / (m Γ(m/2))`.
pub fn radial_exp_integral(m: usize, p: f64) -> f64 {
    assert!(m >= 1 && p > 0.0);
    let mf = m as f64;
    2.0 * PI.powf(mf / 2.0) * gamma(1.0 + mf / p) / (mf * gamma(mf / 2.0))
}

/// Conjugate exponent `p/(p-1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn sphere_areas() {
        assert!(rel(sphere_area(1), 2.0) < 1e-14);
        assert!(rel(sphere_area(2), 2.0 * PI) < 1e-14);
        assert!(rel(sphere_area(3), 4.0 * PI) < 1e-14);
        assert!(rel(sphere_area(4), 2.0 * PI * PI) < 1e-14);
        assert!(rel(sphere_area(5), 8.0 * PI * PI / 3.0) < 1e-14);
    }

    #[test]
    fn riesz_coefficients() {
        assert!(rel(riesz_c_d(3, 2.0).unwrap(), 1.0 / (4.0 * PI)) < 1e-14);
        assert!(rel(riesz_c_d(2, 1.0).unwrap(), 1.0 / (2.0 * PI)) < 1e-14);
        // Newtonian potential 1/((n-2) ω_{n-1})
        for n in 3..8 {
            let c2 = riesz_c_d(n, 2.0).unwrap();
            assert!(rel(c2, 1.0 / ((n as f64 - 2.0) * sphere_area(n))) < 1e-13);
        }
        assert!(riesz_c_d(4, 4.0).is_err());
        assert!(riesz_c_d(4, 0.0).is_err());
    }

    #[test]
    fn gamma_identity_gaussian() {
        for m in 1..=6 {
            let v = radial_exp_integral(m, 2.0);
            assert!(rel(v, PI.powf(m as f64 / 2.0)) < 1e-13, "m={m}");
        }
        // ∫_R exp(-t^4) = 2Γ(5/4)
        assert!(rel(radial_exp_integral(1, 4.0), 2.0 * gamma(1.25)) < 1e-14);
    }
}
