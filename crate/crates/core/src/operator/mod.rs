//! Integral operators `Tf(x) = ∫ k(x,y) f(y) dμ(y)` on finite measure spaces
//! and numerical checks of the improved O'Neil inequalities.

mod instances;
mod oneil;

pub use instances::{random_instance, RandomInstance};
pub use oneil::{
    check_claims, oneil_grids, SLACK, verify_oneil_power, verify_oneil_sharp, verify_weak_type, ClaimReport, OneilPowerReport,
    OneilSharpReport, WeakTypeReport,
};

use crate::error::{Error, Result};
use crate::measure::{kernel_rearrangements, rearrange, FiniteMeasureSpace, KernelMatrix, RearrangementProfile};

/// A linear operator from functions on `M` to functions on `N`.
pub trait Operator: Sync {
    /// The space `(M, μ)` the operator acts on.
    fn domain(&self) -> &FiniteMeasureSpace;
    /// The space `(N, ν)` of values.
    fn codomain(&self) -> &FiniteMeasureSpace;
    fn apply(&self, f: &[f64]) -> Result<Vec<f64>>;
}

/// How the operator's kernel is known to be admissible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certification {
    /// `∫ k2* < ∞`: defined on `L¹`.
    Integrable { k1_integral: f64, k2_integral: f64 },
    /// Infinite entries present; only functions vanishing on singular atoms
    /// can be applied.
    Singular,
}

/// Kernel operator with a dense kernel matrix; `k1*` and `k2*` are computed
/// once at construction.
#[derive(Debug, Clone)]
pub struct IntegralOperator {
    kernel: KernelMatrix,
    domain: FiniteMeasureSpace,
    codomain: FiniteMeasureSpace,
    k1: RearrangementProfile,
    k2: RearrangementProfile,
}

impl IntegralOperator {
    /// `kernel` has one row per point of `codomain` and one column per point
    /// of `domain`.
    pub fn new(kernel: KernelMatrix, domain: FiniteMeasureSpace, codomain: FiniteMeasureSpace) -> Result<Self> {
        let (k1, k2) = kernel_rearrangements(&kernel, &codomain, &domain)?;
        Ok(Self { kernel, domain, codomain, k1, k2 })
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    /// `k1*(t) = sup_x k*(x,·)(t)`, on the scale of `μ`.
    pub fn k1_star(&self) -> &RearrangementProfile {
        &self.k1
    }

    /// `k2*(t) = sup_y k*(·,y)(t)`, on the scale of `ν`.
    pub fn k2_star(&self) -> &RearrangementProfile {
        &self.k2
    }

    pub fn certification(&self) -> Certification {
        let (i1, i2) = (self.k1.integral(), self.k2.integral());
        if i1.is_finite() && i2.is_finite() {
            Certification::Integrable { k1_integral: i1, k2_integral: i2 }
        } else {
            Certification::Singular
        }
    }

    /// Smallest `M̃` with `k1*(t) ≤ M̃ t^{-1/β}` for all `t > 0`.
    pub fn k1_power_coefficient(&self, beta: f64) -> f64 {
        power_coefficient(&self.k1, beta)
    }

    /// Smallest `B̃` with `k2*(t) ≤ B̃ t^{-1/β₀}` for all `t > 0`.
    pub fn k2_power_coefficient(&self, beta0: f64) -> f64 {
        power_coefficient(&self.k2, beta0)
    }

    /// Smallest `M` with `sup_x m(k(x,·), s) ≤ M s^{-β}`; equals `M̃^β`.
    pub fn k1_distribution_coefficient(&self, beta: f64) -> f64 {
        distribution_coefficient(&self.k1, beta)
    }

    /// Smallest `B` with `sup_y m(k(·,y), s) ≤ B s^{-β₀}`.
    pub fn k2_distribution_coefficient(&self, beta0: f64) -> f64 {
        distribution_coefficient(&self.k2, beta0)
    }

    /// The same operator with the kernel multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.kernel.map(|v| v * c), self.domain.clone(), self.codomain.clone())
    }
}

fn power_coefficient(p: &RearrangementProfile, beta: f64) -> f64 {
    p.breakpoints()
        .iter()
        .zip(p.values())
        .map(|(t, v)| if *v == 0.0 { 0.0 } else { v * t.powf(1.0 / beta) })
        .fold(0.0, f64::max)
}

fn distribution_coefficient(p: &RearrangementProfile, beta: f64) -> f64 {
    p.breakpoints()
        .iter()
        .zip(p.values())
        .map(|(t, v)| if *v == 0.0 { 0.0 } else { v.powf(beta) * t })
        .fold(0.0, f64::max)
}

impl Operator for IntegralOperator {
    fn domain(&self) -> &FiniteMeasureSpace {
        &self.domain
    }

    fn codomain(&self) -> &FiniteMeasureSpace {
        &self.codomain
    }

    /// `(Tf)(x_i) = Σ_j k(x_i, y_j) f(y_j) w_j`.
    fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        apply(self, f)
    }
}

/// `(Tf)(x_i) = Σ_j k(x_i, y_j) f(y_j) w_j`; terms with `f(y_j) = 0` are
/// skipped so singular atoms are harmless where `f` vanishes.
pub fn apply(op: &IntegralOperator, f: &[f64]) -> Result<Vec<f64>> {
    let m = &op.domain;
    if f.len() != m.len() {
        return Err(Error::Input(format!("f has {} values, domain has {} points", f.len(), m.len())));
    }
    if let Some(j) = f.iter().position(|v| !v.is_finite()) {
        return Err(Error::Input(format!("f is not finite at index {j}")));
    }
    let w = m.weights();
    let mut out = Vec::with_capacity(op.kernel.rows());
    for i in 0..op.kernel.rows() {
        let row = op.kernel.row(i);
        let mut s = 0.0;
        for j in 0..row.len() {
            if f[j] == 0.0 {
                continue;
            }
            if !row[j].is_finite() {
                return Err(Error::Singularity(format!(
                    "kernel is infinite at ({i}, {j}) where f is nonzero; exclude the diagonal atom"
                )));
            }
            s += row[j] * f[j] * w[j];
        }
        out.push(s);
    }
    Ok(out)
}

/// `(Tf)*` with respect to `ν`.
pub fn image_profile(op: &dyn Operator, f: &[f64]) -> Result<RearrangementProfile> {
    let tf = op.apply(f)?;
    rearrange(&tf, op.codomain())
}
