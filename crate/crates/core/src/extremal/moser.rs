use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{linear_fit, GaussRule};
use crate::special::{riesz_c_d, sphere_area};
use crate::symbol::constants::gradient_riesz_coefficient;

/// Smoothing data for the Moser sequence: transition width 1 starting at
/// `s = δ` in `s = log(1/|y|)`, spline order `ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoserParams {
    pub delta: f64,
    pub ell: usize,
}

impl Default for MoserParams {
    fn default() -> Self {
        Self { delta: 0.5, ell: 4 }
    }
}

impl MoserParams {
    pub fn validate(&self, d: f64) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Parameter(format!("delta must be >= 0, got {}", self.delta)));
        }
        if (self.ell as f64) < d {
            return Err(Error::Parameter(format!("smoothing order ell = {} is below d = {d}", self.ell)));
        }
        Ok(())
    }
}

/// Polynomial coefficients, lowest degree first.
type Poly = Vec<f64>;

fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn deriv(p: &[f64]) -> Poly {
    p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

fn axpy(out: &mut Poly, a: f64, p: &[f64]) {
    if out.len() < p.len() {
        out.resize(p.len(), 0.0);
    }
    for (o, c) in out.iter_mut().zip(p) {
        *o += a * c;
    }
}

/// The degree `2ℓ+1` polynomial `φ(δ + τ)` on `τ ∈ [0, 1]` with
/// `φ^{(k)}(δ) = 0` for `k ≤ ℓ`, `φ(1+δ) = 1+δ`, `φ′(1+δ) = 1` and
/// `φ^{(k)}(1+δ) = 0` for `2 ≤ k ≤ ℓ`. Coefficients are in `τ`.
pub fn moser_spline(params: MoserParams) -> Result<Vec<f64>> {
    let l = params.ell;
    if l == 0 {
        return Err(Error::Parameter("smoothing order must be >= 1".into()));
    }
    let size = l + 1;
    let mut a = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);
    for k in 0..size {
        for (col, j) in (l + 1..=2 * l + 1).enumerate() {
            // k-th derivative of τ^j at τ = 1, divided by k!: binomial(j, k)
            a[(k, col)] = (0..k).fold(1.0, |b, i| b * (j - i) as f64 / (i + 1) as f64);
        }
    }
    rhs[0] = 1.0 + params.delta;
    rhs[1] = 1.0;
    let lu = a.clone().lu();
    let singular = || Error::Degenerate("spline system is singular".into());
    let mut c = lu.solve(&rhs).ok_or_else(singular)?;
    // one step of iterative refinement
    let residual = &rhs - &a * &c;
    c += lu.solve(&residual).ok_or_else(singular)?;
    let mut coef = vec![0.0; 2 * l + 2];
    coef[l + 1..].copy_from_slice(c.as_slice());
    Ok(coef)
}

/// A radial piece `ρ^a P(τ)` where `log ρ = τ_0 + sign·τ`.
#[derive(Debug, Clone)]
struct Piece {
    a: f64,
    p: Poly,
    sign: f64,
}

impl Piece {
    /// `Δ(ρ^a P) = ρ^{a−2}[P_tt + (2a+n−2)P_t + a(a+n−2)P]`, `t = log ρ`.
    fn laplacian(&self, n: f64) -> Piece {
        let (a, s) = (self.a, self.sign);
        let d1 = deriv(&self.p);
        let d2 = deriv(&d1);
        let mut q = Poly::new();
        axpy(&mut q, 1.0, &d2);
        axpy(&mut q, s * (2.0 * a + n - 2.0), &d1);
        axpy(&mut q, a * (a + n - 2.0), &self.p);
        Piece { a: a - 2.0, p: q, sign: s }
    }

    /// Radial component of `∇(ρ^a P)`: `ρ^{a−1}(aP + P_t)`.
    fn gradient(&self) -> Piece {
        let mut q = Poly::new();
        axpy(&mut q, self.a, &self.p);
        axpy(&mut q, self.sign, &deriv(&self.p));
        Piece { a: self.a - 1.0, p: q, sign: self.sign }
    }
}

/// `Δ^{d/2}` for `d` even, `∇Δ^{(d−1)/2}` for `d` odd.
fn apply_d(piece: Piece, n: usize, d: usize) -> Piece {
    let mut out = piece;
    for _ in 0..d / 2 {
        out = out.laplacian(n as f64);
    }
    if d % 2 == 1 {
        out = out.gradient();
    }
    out
}

/// `Δ^{d/2}u` (or `∇Δ^{(d−1)/2}u`) is `c·|y|^{-d}` on the middle annulus;
/// this is the coefficient whose reciprocal enters the sharp constant.
pub fn potential_coefficient(n: usize, d: usize) -> Result<f64> {
    if d % 2 == 0 {
        riesz_c_d(n, d as f64)
    } else {
        Ok(gradient_riesz_coefficient(n, d))
    }
}

/// One member `u_m` of the Moser sequence on `R^n`, with `r_m = 2^{-m}`:
/// `0` for `s ≤ δ`, `φ(s)` up to `1+δ`, `s` on the middle annulus,
/// `L − φ(L−s)` near `r_m` and the plateau `L = log(1/r_m)`, where
/// `s = log(1/|y|)`.
#[derive(Debug, Clone, Serialize)]
pub struct MoserProfile {
    pub n: usize,
    pub d: usize,
    pub params: MoserParams,
    pub m: u32,
    /// `L = log(1/r_m)`
    pub log_inv_r: f64,
    /// `φ` in `τ = s − δ`.
    pub spline: Vec<f64>,
    /// Coefficient of `|y|^{-d}` on the middle annulus (absolute value).
    pub middle_coefficient: f64,
    /// `‖D^d u_m‖_p^p`, `p = n/d`.
    pub norm_pow_p: f64,
    /// `‖D^d u_m‖_p^{p′}`
    pub norm_pow_p_prime: f64,
    #[serde(skip)]
    outer: Piece,
    #[serde(skip)]
    inner: Piece,
}

/// Build `u_m` and its exact derivative norms. `n > d ≥ 1` integers.
pub fn build_moser_um(n: usize, d: usize, params: MoserParams, m: u32) -> Result<MoserProfile> {
    if d == 0 || n <= d {
        return Err(Error::Domain(format!("Moser sequence needs n > d >= 1, got n={n}, d={d}")));
    }
    params.validate(d as f64)?;
    let l = m as f64 * std::f64::consts::LN_2;
    if l <= 2.0 + 2.0 * params.delta {
        return Err(Error::Geometry(format!("m = {m} too small: the transition annuli overlap")));
    }
    let spline = moser_spline(params)?;
    // s = δ + τ and t = −s, so d/dt = −d/dτ
    let outer = apply_d(Piece { a: 0.0, p: spline.clone(), sign: -1.0 }, n, d);
    // log(|y|/r_m) = δ + τ, d/dt = d/dτ; the constant L drops out
    let neg: Poly = spline.iter().map(|c| -c).collect();
    let inner = apply_d(Piece { a: 0.0, p: neg, sign: 1.0 }, n, d);
    let middle = apply_d(Piece { a: 0.0, p: vec![0.0, -1.0], sign: 1.0 }, n, d);
    let middle_coefficient = eval(&middle.p, 0.0).abs();
    let p = n as f64 / d as f64;
    let pp = n as f64 / (n - d) as f64;
    let omega = sphere_area(n);
    let rule = GaussRule::new(20);
    let tail = |q: &[f64]| rule.composite(0.0, 1.0, 64, |t| eval(q, t).abs().powf(p));
    let norm_pow_p =
        omega * (tail(&outer.p) + tail(&inner.p) + (l - 2.0 - 2.0 * params.delta) * middle_coefficient.powf(p));
    Ok(MoserProfile {
        n,
        d,
        params,
        m,
        log_inv_r: l,
        spline,
        middle_coefficient,
        norm_pow_p,
        norm_pow_p_prime: norm_pow_p.powf(pp / p),
        outer,
        inner,
    })
}

impl MoserProfile {
    /// `u_m` at `|y| = ρ`, given as `s = log(1/ρ)` so that tiny radii stay
    /// representable.
    pub fn value_at_s(&self, s: f64) -> f64 {
        let (dl, l) = (self.params.delta, self.log_inv_r);
        if s <= dl {
            0.0
        } else if s <= 1.0 + dl {
            eval(&self.spline, s - dl)
        } else if s <= l - 1.0 - dl {
            s
        } else if s <= l - dl {
            l - eval(&self.spline, l - s - dl)
        } else {
            l
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        self.value_at_s(-rho.ln())
    }

    /// `|y|^d |D^d u_m(y)|` at `s = log(1/|y|)`: the bounded factor in front of
    /// `|y|^{-d}`.
    pub fn scaled_derivative_at_s(&self, s: f64) -> f64 {
        let (dl, l) = (self.params.delta, self.log_inv_r);
        if s <= dl || s > l - dl {
            0.0
        } else if s <= 1.0 + dl {
            eval(&self.outer.p, s - dl).abs()
        } else if s <= l - 1.0 - dl {
            self.middle_coefficient
        } else {
            eval(&self.inner.p, l - s - dl).abs()
        }
    }

    /// Largest jump of `u_m` across the four joints, comparing the two
    /// adjacent piece formulas at each joint.
    pub fn max_joint_jump(&self) -> f64 {
        let (dl, l) = (self.params.delta, self.log_inv_r);
        let phi = |t: f64| eval(&self.spline, t);
        [
            phi(0.0).abs(),
            (phi(1.0) - (1.0 + dl)).abs(),
            ((l - 1.0 - dl) - (l - phi(1.0))).abs(),
            ((l - phi(0.0)) - l).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `(s, u_m, |y|^d |D^d u_m|)` on `count` equally spaced values of `s` in
    /// `[0, L + 1]`.
    pub fn sample(&self, count: usize) -> Vec<(f64, f64, f64)> {
        let top = self.log_inv_r + 1.0;
        (0..count)
            .map(|i| {
                let s = top * i as f64 / (count.max(2) - 1) as f64;
                (s, self.value_at_s(s), self.scaled_derivative_at_s(s))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoserNormReport {
    pub n: usize,
    pub d: usize,
    pub ms: Vec<u32>,
    pub log_inv_r: Vec<f64>,
    pub norms: Vec<f64>,
    /// Slope of `‖D^d u_m‖_p^{p′}` against `L^{p′/p}`.
    pub slope: f64,
    /// `(ω_{n−1} c^{p′})^{-1}`
    pub expected_slope: f64,
    pub relative_error: f64,
    pub middle_coefficient: f64,
    /// `1/(ω_{n−1} c)`
    pub expected_middle: f64,
}

pub fn moser_norm_regression(n: usize, d: usize, params: MoserParams, ms: &[u32]) -> Result<MoserNormReport> {
    if ms.len() < 2 {
        return Err(Error::Input("need at least two m values".into()));
    }
    let profiles = ms.iter().map(|&m| build_moser_um(n, d, params, m)).collect::<Result<Vec<_>>>()?;
    let p = n as f64 / d as f64;
    let pp = n as f64 / (n - d) as f64;
    let xs: Vec<f64> = profiles.iter().map(|u| u.log_inv_r.powf(pp / p)).collect();
    let norms: Vec<f64> = profiles.iter().map(|u| u.norm_pow_p_prime).collect();
    let (_, slope, _) = linear_fit(&xs, &norms);
    let c = potential_coefficient(n, d)?;
    let omega = sphere_area(n);
    let expected_slope = 1.0 / (omega * c.powf(pp));
    Ok(MoserNormReport {
        n,
        d,
        ms: ms.to_vec(),
        log_inv_r: profiles.iter().map(|u| u.log_inv_r).collect(),
        norms,
        slope,
        expected_slope,
        relative_error: (slope - expected_slope).abs() / expected_slope,
        middle_coefficient: profiles[0].middle_coefficient,
        expected_middle: 1.0 / (omega * c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_boundary_conditions() {
        let params = MoserParams { delta: 0.7, ell: 3 };
        let c = moser_spline(params).unwrap();
        assert_eq!(c.len(), 8);
        let mut p = c.clone();
        for k in 0..=3 {
            assert!(eval(&p, 0.0).abs() < 1e-14);
            let want = match k {
                0 => 1.7,
                1 => 1.0,
                _ => 0.0,
            };
            assert!((eval(&p, 1.0) - want).abs() < 1e-10, "k={k}");
            p = deriv(&p);
        }
    }

    #[test]
    fn plateau_and_middle_values() {
        let u = build_moser_um(3, 2, MoserParams::default(), 20).unwrap();
        let l = 20.0 * std::f64::consts::LN_2;
        assert!((u.value(1e-9) - l).abs() < 1e-12);
        assert_eq!(u.value(0.99), 0.0);
        let rho = 0.01;
        assert!((u.value(rho) - (1.0f64 / rho).ln()).abs() < 1e-12);
        assert!(u.max_joint_jump() < 1e-10, "{}", u.max_joint_jump());
    }

    #[test]
    fn middle_coefficient_matches_potential() {
        for (n, d) in [(3, 2), (4, 2), (5, 2), (5, 4), (6, 4), (7, 4), (2, 1), (4, 3)] {
            let u = build_moser_um(n, d, MoserParams { delta: 0.5, ell: 5 }, 20).unwrap();
            let want = 1.0 / (sphere_area(n) * potential_coefficient(n, d).unwrap());
            assert!((u.middle_coefficient - want).abs() < 1e-10 * want, "n={n} d={d}");
        }
        assert!((build_moser_um(3, 2, MoserParams::default(), 20).unwrap().middle_coefficient - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_is_linear_in_l() {
        let a = build_moser_um(3, 2, MoserParams::default(), 40).unwrap();
        let b = build_moser_um(3, 2, MoserParams::default(), 80).unwrap();
        let c = build_moser_um(3, 2, MoserParams::default(), 120).unwrap();
        assert!(((c.norm_pow_p - b.norm_pow_p) - (b.norm_pow_p - a.norm_pow_p)).abs() < 1e-9 * c.norm_pow_p);
    }

    #[test]
    fn norm_slope_within_three_percent() {
        let ms: Vec<u32> = (1..=10).map(|k| 100_000 * k).collect();
        for (n, d) in [(3, 2), (4, 2), (5, 4), (6, 4), (7, 4)] {
            let rep = moser_norm_regression(n, d, MoserParams::default(), &ms).unwrap();
            assert!(rep.relative_error < 0.03, "n={n} d={d}: {rep:?}");
        }
    }

    #[test]
    fn smoothing_order_error() {
        assert!(matches!(build_moser_um(5, 4, MoserParams { delta: 0.5, ell: 3 }, 20), Err(Error::Parameter(_))));
        assert!(matches!(build_moser_um(3, 2, MoserParams::default(), 2), Err(Error::Geometry(_))));
    }
}
