use rayon::prelude::*;
use serde::Serialize;

use super::family::{ExtremalFamily, MeshOptions};
use crate::error::{Error, Result};
use crate::measure::FiniteMeasureSpace;
use crate::operator::Operator;
use crate::quadrature::linear_fit;
use crate::special::sphere_area;

/// `∫_N exp[α(|Tf|/‖f‖_{β′})^β] dν` with `‖f‖_{β′}` taken in `T`'s domain.
pub fn exp_integral(op: &dyn Operator, f: &[f64], alpha: f64, nu: &FiniteMeasureSpace, beta: f64) -> Result<f64> {
    if !(beta > 1.0) {
        return Err(Error::Parameter(format!("beta must exceed 1, got {beta}")));
    }
    let norm = op.domain().lp_norm(f, beta / (beta - 1.0));
    let tf = op.apply(f)?;
    exp_integral_of_image(&tf, norm, alpha, nu, beta)
}

/// [`exp_integral`] from a precomputed image `Tf` and norm `‖f‖_{β′}`.
pub fn exp_integral_of_image(tf: &[f64], norm: f64, alpha: f64, nu: &FiniteMeasureSpace, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    if tf.len() != nu.len() {
        return Err(Error::Input(format!("Tf has {} values, nu has {} points", tf.len(), nu.len())));
    }
    if !(norm > 0.0) {
        return Err(Error::DivisionByZero("f has zero L^{beta'} norm".into()));
    }
    Ok(tf.iter().zip(nu.weights()).map(|(v, w)| w * (alpha * (v.abs() / norm).powf(beta)).exp()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Diverges,
    Bounded,
    Inconclusive,
}

/// Growth threshold for a DIVERGES verdict: the last three ratios must all
/// reach `1 + θ`.
pub const GROWTH_THETA: f64 = 0.05;

/// DIVERGES when the last three successive ratios are `≥ 1 + θ` and the
/// fitted growth exponent is positive; BOUNDED when each of the last three
/// increments is non-positive or smaller than the previous positive one.
pub fn classify(values: &[f64], fitted_exponent: f64) -> Verdict {
    if values.len() < 4 {
        return Verdict::Inconclusive;
    }
    let k = values.len();
    let ratios_grow = (k - 3..k).all(|i| values[i] >= (1.0 + GROWTH_THETA) * values[i - 1]);
    if ratios_grow && fitted_exponent > 0.0 {
        return Verdict::Diverges;
    }
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let j = inc.len();
    let decaying = (j.saturating_sub(3)..j).all(|i| {
        if inc[i] <= 0.0 {
            return true;
        }
        let prev = inc[..i].iter().rev().find(|&&v| v > 0.0);
        matches!(prev, Some(&p) if inc[i] < p)
    });
    if decaying && j >= 3 {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaVerdict {
    pub alpha: f64,
    pub verdict: Verdict,
    /// Slope of `log I` against `log(1/r_m)` over the upper half of `m`.
    pub fitted_exponent: f64,
    /// `(αAβ − β₀)(n − d)`; meaningful above threshold.
    pub predicted_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub threshold: f64,
    pub alphas: Vec<f64>,
    pub ms: Vec<u32>,
    /// `table[i][j]`: integral at `ms[i]`, `alphas[j]`.
    pub table: Vec<Vec<f64>>,
    pub verdicts: Vec<AlphaVerdict>,
}

fn upper_half_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let start = (xs.len() / 2).min(xs.len().saturating_sub(3));
    linear_fit(&xs[start..], &ys[start..]).1
}

/// Exponential integrals of the normalized images `TΦ_m` over a grid of
/// `α` and `m`, with a verdict per `α`.
pub fn sharpness_sweep(family: &ExtremalFamily, alphas: &[f64], ms: &[u32], mesh: MeshOptions) -> Result<SweepReport> {
    if alphas.is_empty() || ms.len() < 2 || ms.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("need alphas and a strictly increasing list of at least two m".into()));
    }
    let m_max = *ms.last().unwrap();
    let disc = family.discretize(m_max, mesh)?;
    let beta = family.exponents.beta;
    let bp = family.exponents.beta_prime;
    let table = ms
        .iter()
        .map(|&m| {
            let phi = family.build_phi_m(&disc, m)?;
            let norm = disc.mu.lp_norm(&phi, bp);
            let tf = disc.operator.apply(&phi)?;
            alphas.iter().map(|&a| exp_integral_of_image(&tf, norm, a, &disc.nu, beta)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<f64> = ms.iter().map(|&m| (1.0 / family.r_m(m)).ln()).collect();
    let verdicts = alphas
        .iter()
        .enumerate()
        .map(|(j, &alpha)| {
            let col: Vec<f64> = table.iter().map(|row| row[j]).collect();
            let lnv: Vec<f64> = col.iter().map(|v| v.ln()).collect();
            let fitted = upper_half_slope(&logs, &lnv);
            AlphaVerdict {
                alpha,
                verdict: classify(&col, fitted),
                fitted_exponent: fitted,
                predicted_exponent: family.predicted_exponent(alpha),
            }
        })
        .collect();
    Ok(SweepReport { threshold: family.threshold(), alphas: alphas.to_vec(), ms: ms.to_vec(), table, verdicts })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub k: u32,
    pub r: f64,
    pub log_inv_r: f64,
    /// `‖f_r‖_{β′}^{β′}` on the mesh.
    pub norm_pow: f64,
    /// `ω_{n−1} log(1/r)`
    pub norm_pow_exact: f64,
    /// `∫ exp[(n/ω_{n−1})(T f̃_r)^β] dx` with the log-perturbed kernel.
    pub integral: f64,
    /// The same with the plain Riesz kernel.
    pub control: f64,
    /// `(ω_{n−1}/n) 2^{-n} (log 1/r)^{nβ/2}`
    pub lower_bound: f64,
    /// `r ≥ r₀`: too coarse for the asymptotic regime.
    pub pre_asymptotic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub d: f64,
    pub alpha: f64,
    pub rows: Vec<CounterexampleRow>,
    /// Slope of `log I` against `log log(1/r)`.
    pub fitted_exponent: f64,
    /// `nβ/2`
    pub expected_exponent: f64,
    pub control_fitted_exponent: f64,
    /// [`classify`] applied to the plain Riesz control column.
    pub control_verdict: Verdict,
    pub lower_bound_holds: bool,
}

/// `r₀` below which the counterexample rows count as asymptotic.
pub const COUNTEREXAMPLE_R0: f64 = 1.0 / 32.0;

/// `f_r = |x|^{-d}` on `r ≤ |x| ≤ 1`, `r = 2^{-k}`, pushed through the
/// log-perturbed kernel `|x−y|^{d−n}(1 + 1/(1+|log|x−y||))` and the plain
/// Riesz control at `α = n/ω_{n−1}`. Only `n = 1` has a mesh.
pub fn log_counterexample(n: usize, d: f64, ks: &[u32], mesh: MeshOptions) -> Result<CounterexampleReport> {
    if n != 1 {
        return Err(Error::Unsupported("the counterexample mesh is implemented for n = 1".into()));
    }
    if ks.len() < 2 {
        return Err(Error::Input("need at least two r values".into()));
    }
    let fam = ExtremalFamily::log_counterexample(n, d)?;
    let control = ExtremalFamily::riesz(n, d, n as f64)?;
    let k_max = *ks.iter().max().unwrap();
    let disc = fam.discretize(k_max, mesh)?;
    let disc_c = control.discretize(k_max, mesh)?;
    let beta = fam.exponents.beta;
    let bp = fam.exponents.beta_prime;
    let omega = sphere_area(n);
    let alpha = n as f64 / omega;
    let rows = ks
        .par_iter()
        .map(|&k| {
            let r = fam.check_geometry(k)?;
            let f: Vec<f64> = disc.radii.iter().map(|&rho| if rho > r { rho.powf(-d) } else { 0.0 }).collect();
            let norm = disc.mu.lp_norm(&f, bp);
            let integral = exp_integral_of_image(&disc.operator.apply(&f)?, norm, alpha, &disc.nu, beta)?;
            let control_v = exp_integral_of_image(&disc_c.operator.apply(&f)?, norm, alpha, &disc_c.nu, beta)?;
            let l = (1.0 / r).ln();
            Ok(CounterexampleRow {
                k,
                r,
                log_inv_r: l,
                norm_pow: norm.powf(bp),
                norm_pow_exact: omega * l,
                integral,
                control: control_v,
                lower_bound: omega / n as f64 * 2f64.powi(-(n as i32)) * l.powf(n as f64 * beta / 2.0),
                pre_asymptotic: r >= COUNTEREXAMPLE_R0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let asym: Vec<&CounterexampleRow> = rows.iter().filter(|r| !r.pre_asymptotic).collect();
    let fit_rows: Vec<&CounterexampleRow> = if asym.len() >= 2 { asym } else { rows.iter().collect() };
    let x: Vec<f64> = fit_rows.iter().map(|r| r.log_inv_r.ln()).collect();
    let fit = |get: &dyn Fn(&CounterexampleRow) -> f64| {
        let y: Vec<f64> = fit_rows.iter().map(|r| get(r).ln()).collect();
        linear_fit(&x, &y).1
    };
    Ok(CounterexampleReport {
        n,
        d,
        alpha,
        fitted_exponent: fit(&|r| r.integral),
        expected_exponent: n as f64 * beta / 2.0,
        control_fitted_exponent: fit(&|r| r.control),
        control_verdict: classify(&rows.iter().map(|r| r.control).collect::<Vec<_>>(), fit(&|r| r.control)),
        lower_bound_holds: rows.iter().all(|r| r.integral >= r.lower_bound),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::grid::{Grid1D, RadialOperator1D};
    use crate::quadrature::integrate_adaptive;
    use crate::symbol::RadialKernel;

    fn small_mesh() -> MeshOptions {
        MeshOptions { per_shell: 16, extra_levels: 6, sectors: 8 }
    }

    #[test]
    fn alpha_to_zero_gives_mass() {
        let g = Grid1D::dyadic(0.0, 1.0, 8, 8).unwrap();
        let op = RadialOperator1D::lebesgue(g.clone(), RadialKernel::Power { a: 0.5 }).unwrap();
        let f = vec![1.0; g.len()];
        let v = exp_integral(&op, &f, 1e-12, op.codomain(), 2.0).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        assert!(matches!(exp_integral(&op, &vec![0.0; g.len()], 0.5, op.codomain(), 2.0), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn constant_kernel_closed_form() {
        use crate::measure::KernelMatrix;
        use crate::operator::IntegralOperator;
        let mu = FiniteMeasureSpace::uniform(5, 2.0).unwrap();
        let nu = FiniteMeasureSpace::uniform(3, 1.5).unwrap();
        let op = IntegralOperator::new(KernelMatrix::constant(3, 5, 0.7).unwrap(), mu, nu.clone()).unwrap();
        let f = vec![3.0; 5];
        // Tf = 0.7·3·2, ‖f‖_2 = 3·√2
        let expect = 1.5 * (0.4 * (0.7 * 6.0 / (3.0 * 2f64.sqrt())).powi(2)).exp();
        let v = exp_integral(&op, &f, 0.4, &nu, 2.0).unwrap();
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn phi8_matches_refined_oracle() {
        let fam = ExtremalFamily::riesz(1, 0.5, 1.0).unwrap();
        let disc = fam.discretize(8, MeshOptions::default()).unwrap();
        let phi = fam.build_phi_m(&disc, 8).unwrap();
        let v = exp_integral(disc.operator.as_ref(), &phi, 0.5, &disc.nu, 2.0).unwrap();
        // oracle: TΦ_8 in closed form from the antiderivatives of
        // 1/√(y|y−x|), then the outer integral adaptively
        let r = 2f64.powi(-8);
        let norm2 = 2.0 * (1.0f64 / r).ln();
        let above = |x: f64, y: f64| 2.0 * (y.sqrt() + (y - x).sqrt()).ln();
        let below = |x: f64, y: f64| 2.0 * (y / x).sqrt().asin();
        let t = |x: f64| {
            let x = x.abs();
            let right = if x <= r {
                above(x, 1.0) - above(x, r)
            } else {
                (std::f64::consts::PI - below(x, r)) + (above(x, 1.0) - x.ln())
            };
            let left = above(-x, 1.0) - above(-x, r);
            right + left
        };
        let outer = |x: f64| (0.5 * t(x).powi(2) / norm2).exp();
        let mut oracle = 2.0 * integrate_adaptive(outer, 0.0, r, 1e-14, 1e-10).value;
        let mut lo: f64 = r;
        while lo < 1.0 {
            let hi = (2.0 * lo).min(1.0);
            oracle += 2.0 * integrate_adaptive(outer, lo, hi, 1e-14, 1e-10).value;
            lo = hi;
        }
        assert!((v - oracle).abs() / oracle < 0.01, "{v} vs {oracle}");
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(classify(&[1.0, 1.2, 1.5, 1.9, 2.5], 0.3), Verdict::Diverges);
        assert_eq!(classify(&[1.0, 1.5, 1.75, 1.875, 1.94], 0.1), Verdict::Bounded);
        assert_eq!(classify(&[1.0, 1.1, 1.3, 1.6], -0.1), Verdict::Inconclusive);
        assert_eq!(classify(&[1.0, 1.1], 1.0), Verdict::Inconclusive);
    }

    #[test]
    fn riesz_sweep_brackets_threshold() {
        let fam = ExtremalFamily::riesz(1, 0.5, 1.0).unwrap();
        let ms: Vec<u32> = (4..=12).collect();
        let rep = sharpness_sweep(&fam, &[0.4, 0.6], &ms, small_mesh()).unwrap();
        assert_eq!(rep.verdicts[0].verdict, Verdict::Bounded, "{rep:?}");
        assert_eq!(rep.verdicts[1].verdict, Verdict::Diverges, "{rep:?}");
        for row in &rep.table {
            assert!(row[1] > row[0] && row[0] >= 2.0);
        }
    }

    #[test]
    fn sweep_invariant_under_scaling() {
        let fam = ExtremalFamily::riesz(1, 0.5, 1.0).unwrap();
        let disc = fam.discretize(6, small_mesh()).unwrap();
        let phi = fam.build_phi_m(&disc, 6).unwrap();
        let scaled: Vec<f64> = phi.iter().map(|v| -3.5 * v).collect();
        let a = exp_integral(disc.operator.as_ref(), &phi, 0.6, &disc.nu, 2.0).unwrap();
        let b = exp_integral(disc.operator.as_ref(), &scaled, 0.6, &disc.nu, 2.0).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn counterexample_norms_exact() {
        let rep = log_counterexample(1, 0.5, &[6, 8, 10], small_mesh()).unwrap();
        for row in &rep.rows {
            assert!((row.norm_pow - row.norm_pow_exact).abs() / row.norm_pow_exact < 1e-3, "{row:?}");
            assert!(row.integral > row.control);
        }
        assert!(log_counterexample(2, 0.5, &[6, 8], small_mesh()).is_err());
    }
}
