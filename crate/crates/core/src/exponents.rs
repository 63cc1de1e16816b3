//! Exponent bookkeeping for the exponential-integrability theorems.

use serde::Serialize;

use crate::error::{Error, Result};

/// `(β, β′, β₀, γ, p, q, A, B)` with `1/β + 1/β′ = 1`,
/// `max{1, (β−β₀)/(β−1)} < p < β′` and `q = pβ₀/(β − (β−1)p) > p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentSet {
    pub beta: f64,
    pub beta_prime: f64,
    pub beta0: f64,
    pub gamma: f64,
    pub p: f64,
    pub q: f64,
    /// Leading coefficient of `m(k1*, s)`.
    pub a: f64,
    /// Coefficient of `m(k2*, s)`.
    pub b: f64,
}

impl ExponentSet {
    /// Build and validate; `p = None` selects the midpoint of the admissible
    /// interval.
    pub fn new(beta: f64, beta0: f64, gamma: f64, p: Option<f64>, a: f64, b: f64) -> Result<Self> {
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::Parameter(format!("beta must exceed 1, got {beta}")));
        }
        if !(beta0 > 0.0 && beta0 <= beta) {
            return Err(Error::Parameter(format!("beta0 must lie in (0, beta], got {beta0}")));
        }
        if !(gamma > 1.0) {
            return Err(Error::Parameter(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Parameter("A and B must be positive and finite".into()));
        }
        let (lo, hi) = Self::p_interval(beta, beta0);
        let p = p.unwrap_or(0.5 * (lo + hi));
        if !(p > lo && p < hi) {
            return Err(Error::Parameter(format!("p = {p} outside the admissible interval ({lo}, {hi})")));
        }
        let q = p * beta0 / (beta - (beta - 1.0) * p);
        if !(q > p) {
            return Err(Error::Parameter(format!("q = {q} must exceed p = {p}")));
        }
        Ok(Self { beta, beta_prime: beta / (beta - 1.0), beta0, gamma, p, q, a, b })
    }

    /// The open interval `(max{1, (β−β₀)/(β−1)}, β′)` for `p`.
    pub fn p_interval(beta: f64, beta0: f64) -> (f64, f64) {
        (f64::max(1.0, (beta - beta0) / (beta - 1.0)), beta / (beta - 1.0))
    }

    pub fn p_prime(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// The sharp exponential coefficient `β₀/(Aβ)`.
    pub fn sharp_constant(&self) -> f64 {
        self.beta0 / (self.a * self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_from_p() {
        let e = ExponentSet::new(2.0, 1.5, 2.0, Some(1.6), 1.0, 1.0).unwrap();
        assert!((e.q - 6.0).abs() < 1e-12);
        assert_eq!(e.beta_prime, 2.0);
        assert!((1.0 / e.beta + 1.0 / e.beta_prime - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_p_is_midpoint() {
        let e = ExponentSet::new(2.0, 2.0, 2.0, None, 1.0, 1.0).unwrap();
        assert_eq!(e.p, 1.5);
        assert!((e.q - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(ExponentSet::new(1.0, 1.0, 2.0, None, 1.0, 1.0).is_err());
        assert!(ExponentSet::new(2.0, 2.5, 2.0, None, 1.0, 1.0).is_err());
        assert!(ExponentSet::new(2.0, 1.5, 2.0, Some(2.0), 1.0, 1.0).is_err());
        assert!(ExponentSet::new(2.0, 1.5, 2.0, Some(1.0), 1.0, 1.0).is_err());
        assert!(ExponentSet::new(2.0, 1.5, 0.5, None, 1.0, 1.0).is_err());
    }

    #[test]
    fn sharp_constant_riesz_line() {
        // n=1, d=1/2: β = β0 = 2, A = 2
        let e = ExponentSet::new(2.0, 2.0, 2.0, None, 2.0, 2.0).unwrap();
        assert_eq!(e.sharp_constant(), 0.5);
    }
}
