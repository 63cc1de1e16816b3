use serde::Serialize;

use super::{IntegralOperator, Operator};
use crate::error::{Error, Result};
use crate::exponents::ExponentSet;
use crate::measure::{rearrange, RearrangementProfile};
use crate::quadrature::geometric_grid;

/// Relative slack absorbed by the exact inequalities.
pub const SLACK: f64 = 1e-10;

/// Geometric `(t, τ)` grids over `[1e-3·mass, mass]`: `t` on the scale of
/// `ν` (codomain), `τ` on the scale of `μ` (domain).
pub fn oneil_grids(op: &IntegralOperator, count: usize) -> (Vec<f64>, Vec<f64>) {
    let mn = op.codomain().total_mass();
    let mm = op.domain().total_mass();
    (geometric_grid(1e-3 * mn, mn, count), geometric_grid(1e-3 * mm, mm, count))
}

struct Parts {
    f_star: RearrangementProfile,
    tf_star: RearrangementProfile,
}

fn parts(op: &IntegralOperator, f: &[f64]) -> Result<Parts> {
    let f_star = rearrange(f, op.domain())?;
    let tf = op.apply(f)?;
    let tf_star = rearrange(&tf, op.codomain())?;
    Ok(Parts { f_star, tf_star })
}

fn tail(f_star: &RearrangementProfile, k1: &RearrangementProfile, tau: f64) -> f64 {
    let end = f_star.total_mass().max(k1.total_mass());
    f_star.integral_product(k1, tau, end)
}

/// `∫_0^τ f*(u) u^{-1+1/p} du`, exact on the steps.
fn weighted_head(f_star: &RearrangementProfile, tau: f64, p: f64) -> f64 {
    let mut s = 0.0;
    let mut a = 0.0;
    for (&b, &v) in f_star.breakpoints().iter().zip(f_star.values()) {
        if a >= tau {
            break;
        }
        let hi = b.min(tau);
        if v != 0.0 {
            s += v * p * (hi.powf(1.0 / p) - a.powf(1.0 / p));
        }
        a = b;
    }
    s
}

fn check_grids(t_grid: &[f64], tau_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || tau_grid.is_empty() || t_grid.iter().chain(tau_grid).any(|v| !(*v > 0.0)) {
        return Err(Error::Parameter("t and tau grids must be nonempty and positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneilSharpReport {
    pub holds: bool,
    /// `max (LHS − RHS)/max(RHS, LHS, 1)`; nonpositive when the inequality holds.
    pub max_violation: f64,
    pub worst_t: f64,
    pub worst_tau: f64,
    pub checks: usize,
}

/// `(Tf)**(t) ≤ τ max{k1**(τ), k2**(t)} f**(τ) + ∫_τ^∞ f* k1*` at every grid
/// pair; no free constant.
pub fn verify_oneil_sharp(op: &IntegralOperator, f: &[f64], t_grid: &[f64], tau_grid: &[f64]) -> Result<OneilSharpReport> {
    check_grids(t_grid, tau_grid)?;
    let Parts { f_star, tf_star } = parts(op, f)?;
    let (k1, k2) = (op.k1_star(), op.k2_star());
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
    for &tau in tau_grid {
        let head = tau * k1.double_star(tau)?.max(0.0);
        let f2 = f_star.double_star(tau)?;
        let tl = tail(&f_star, k1, tau);
        for &t in t_grid {
            let lhs = tf_star.double_star(t)?;
            let kmax = head.max(tau * k2.double_star(t)?);
            let rhs = if f2 == 0.0 { 0.0 } else { kmax * f2 } + tl;
            let v = (lhs - rhs) / rhs.max(lhs).max(1.0);
            if v > worst.0 {
                worst = (v, t, tau);
            }
        }
    }
    Ok(OneilSharpReport {
        holds: worst.0 <= SLACK,
        max_violation: worst.0,
        worst_t: worst.1,
        worst_tau: worst.2,
        checks: t_grid.len() * tau_grid.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneilPowerReport {
    /// Smallest `C` making the inequality hold on all grid points and
    /// functions.
    pub c_witness: f64,
    /// The constant obtained by chaining the weak-type bound through the
    /// proof: `C_w/p + β′ M̃`.
    pub c_chain: f64,
    /// `max (LHS − RHS(c_chain))/scale`.
    pub max_violation: f64,
    pub holds: bool,
    /// `M̃` with `k1*(t) ≤ M̃ t^{-1/β}`.
    pub m_tilde: f64,
    /// `B̃` with `k2*(t) ≤ B̃ t^{-1/β₀}`.
    pub b_tilde: f64,
}

/// Weak-type constant `q²/(β₀(q−p)) M^{1−1/p} B^{1/q}` for distribution-form
/// coefficients `M`, `B`.
pub fn weak_type_constant(e: &ExponentSet, m: f64, b: f64) -> f64 {
    e.q * e.q / (e.beta0 * (e.q - e.p)) * m.powf(1.0 - 1.0 / e.p) * b.powf(1.0 / e.q)
}

fn certified(op: &IntegralOperator, e: &ExponentSet) -> Result<(f64, f64)> {
    let m = op.k1_power_coefficient(e.beta);
    let b = op.k2_power_coefficient(e.beta0);
    if !(m.is_finite() && b.is_finite()) {
        return Err(Error::Parameter("power bounds on k1*, k2* are not finite for these exponents".into()));
    }
    Ok((m, b))
}

fn double_star_constant(op: &IntegralOperator, e: &ExponentSet) -> f64 {
    let m = op.k1_distribution_coefficient(e.beta);
    let b = op.k2_distribution_coefficient(e.beta0);
    weak_type_constant(e, m, b) * e.q / (e.q - 1.0)
}

/// `(Tf)**(t) ≤ C max{τ^{-β₀/(qβ)}, t^{-1/q}} ∫_0^τ f* u^{-1+1/p} du + ∫_τ^∞ f* k1*`
/// over a family of functions. Reports the empirical minimal `C` and checks
/// it against the chained constant.
pub fn verify_oneil_power(
    op: &IntegralOperator,
    family: &[Vec<f64>],
    e: &ExponentSet,
    t_grid: &[f64],
    tau_grid: &[f64],
) -> Result<OneilPowerReport> {
    check_grids(t_grid, tau_grid)?;
    let (m_tilde, b_tilde) = certified(op, e)?;
    let c_chain = double_star_constant(op, e) / e.p + e.beta_prime * m_tilde;
    let k1 = op.k1_star();
    let mut witness: f64 = 0.0;
    let mut violation = f64::NEG_INFINITY;
    for f in family {
        let Parts { f_star, tf_star } = parts(op, f)?;
        let lhs: Vec<f64> = t_grid.iter().map(|&t| tf_star.double_star(t)).collect::<Result<_>>()?;
        for &tau in tau_grid {
            let head = weighted_head(&f_star, tau, e.p);
            let tl = tail(&f_star, k1, tau);
            for (&t, &l) in t_grid.iter().zip(&lhs) {
                let bracket = tau.powf(-e.beta0 / (e.q * e.beta)).max(t.powf(-1.0 / e.q)) * head;
                if bracket > 0.0 {
                    witness = witness.max((l - tl) / bracket);
                }
                let rhs = c_chain * bracket + tl;
                violation = violation.max((l - rhs) / rhs.max(l).max(1.0));
            }
        }
    }
    Ok(OneilPowerReport {
        c_witness: witness,
        c_chain,
        max_violation: violation,
        holds: violation <= SLACK,
        m_tilde,
        b_tilde,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakTypeReport {
    /// `sup_s s·m(Tf,s)^{1/q}`, attained just below the values of `|Tf|`.
    pub lhs_max: f64,
    /// Maximum over the supplied `s` grid only.
    pub lhs_grid_max: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `rhs / lhs_max`.
    pub slack_factor: f64,
    pub m_coef: f64,
    pub b_coef: f64,
}

/// `s·m(Tf,s)^{1/q} ≤ q²/(β₀(q−p)) M^{1−1/p} B^{1/q} ‖f‖_p`, with `M`, `B`
/// the certified distribution-form coefficients of the kernel.
pub fn verify_weak_type(op: &IntegralOperator, f: &[f64], e: &ExponentSet, s_grid: &[f64]) -> Result<WeakTypeReport> {
    if !(e.q > e.p) {
        return Err(Error::Parameter(format!("need q > p, got q = {}, p = {}", e.q, e.p)));
    }
    certified(op, e)?;
    let m_coef = op.k1_distribution_coefficient(e.beta);
    let b_coef = op.k2_distribution_coefficient(e.beta0);
    let Parts { f_star: _, tf_star } = parts(op, f)?;
    let lhs_max = tf_star
        .breakpoints()
        .iter()
        .zip(tf_star.values())
        .map(|(t, v)| v * t.powf(1.0 / e.q))
        .fold(0.0, f64::max);
    let lhs_grid_max = s_grid
        .iter()
        .map(|&s| s * tf_star.distribution(s).powf(1.0 / e.q))
        .fold(0.0, f64::max);
    let rhs = weak_type_constant(e, m_coef, b_coef) * op.domain().lp_norm(f, e.p);
    Ok(WeakTypeReport {
        lhs_max,
        lhs_grid_max,
        rhs,
        holds: lhs_max <= rhs * (1.0 + SLACK),
        slack_factor: if lhs_max > 0.0 { rhs / lhs_max } else { f64::INFINITY },
        m_coef,
        b_coef,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    /// `μ(supp f)`.
    pub z: f64,
    /// `max |f|`.
    pub alpha: f64,
    /// `max_t (Tf)**(t) / (α z k1**(z))`.
    pub ratio_k1: f64,
    /// `max_t (Tf)**(t) / (C α z^{1/p} t^{-1/q})` with the weak-type `C`.
    pub ratio_weak: f64,
    /// `max_t (Tf)**(t) / (α z k2**(t))`.
    pub ratio_k2: f64,
    pub holds: bool,
}

/// The three single-support bounds used inside the O'Neil argument.
pub fn check_claims(op: &IntegralOperator, f: &[f64], e: &ExponentSet, t_grid: &[f64]) -> Result<ClaimReport> {
    let Parts { f_star, tf_star } = parts(op, f)?;
    let z = f_star.distribution(0.0);
    let alpha = f_star.sup();
    if z == 0.0 {
        return Ok(ClaimReport { z, alpha, ratio_k1: 0.0, ratio_weak: 0.0, ratio_k2: 0.0, holds: true });
    }
    let c_weak = double_star_constant(op, e);
    let r_k1 = alpha * z * op.k1_star().double_star(z)?;
    let (mut q_k1, mut q_weak, mut q_k2): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &t in t_grid {
        let lhs = tf_star.double_star(t)?;
        q_k1 = q_k1.max(lhs / r_k1);
        q_weak = q_weak.max(lhs / (c_weak * alpha * z.powf(1.0 / e.p) * t.powf(-1.0 / e.q)));
        q_k2 = q_k2.max(lhs / (alpha * z * op.k2_star().double_star(t)?));
    }
    let ok = |r: f64| r.is_nan() || r <= 1.0 + SLACK;
    Ok(ClaimReport { z, alpha, ratio_k1: q_k1, ratio_weak: q_weak, ratio_k2: q_k2, holds: ok(q_k1) && ok(q_weak) && ok(q_k2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{FiniteMeasureSpace, KernelMatrix};

    fn constant_op(c: f64) -> IntegralOperator {
        let m = FiniteMeasureSpace::atomic(vec![0.5, 0.25, 0.25]).unwrap();
        let n = FiniteMeasureSpace::atomic(vec![1.0, 1.0]).unwrap();
        IntegralOperator::new(KernelMatrix::constant(2, 3, c).unwrap(), m, n).unwrap()
    }

    #[test]
    fn constant_kernel_sharp_form_tight_at_full_mass() {
        let op = constant_op(2.0);
        let f = [1.0, -3.0, 0.5];
        let (tg, mut taug) = oneil_grids(&op, 20);
        taug.push(1.0);
        let r = verify_oneil_sharp(&op, &f, &tg, &taug).unwrap();
        assert!(r.holds, "{r:?}");
        // τ = mass(M): RHS = c‖f‖₁ = ‖Tf‖_∞
        let f_star = rearrange(&f, op.domain()).unwrap();
        let rhs = 1.0 * op.k1_star().double_star(1.0).unwrap() * f_star.double_star(1.0).unwrap();
        let l1: f64 = op.domain().lp_norm(&f, 1.0);
        assert!((rhs - 2.0 * l1).abs() < 1e-14);
    }

    #[test]
    fn constant_kernel_power_form_finite() {
        let op = constant_op(1.0);
        let e = ExponentSet::new(2.0, 1.5, 2.0, Some(1.6), 1.0, 1.0).unwrap();
        let (tg, taug) = oneil_grids(&op, 20);
        let r = verify_oneil_power(&op, &[vec![1.0, 1.0, 1.0]], &e, &tg, &taug).unwrap();
        assert!(r.c_witness.is_finite() && r.c_witness > 0.0);
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn weak_type_zero_function() {
        let op = constant_op(1.0);
        let e = ExponentSet::new(2.0, 1.5, 2.0, Some(1.6), 1.0, 1.0).unwrap();
        let r = verify_weak_type(&op, &[0.0; 3], &e, &[0.1, 1.0]).unwrap();
        assert_eq!(r.lhs_max, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn weighted_head_exact() {
        let p = RearrangementProfile::new(vec![1.0, 2.0], vec![2.0, 1.0]).unwrap();
        // ∫_0^1 2 u^{-1/2} + ∫_1^1.5 u^{-1/2} with p = 2
        let v = weighted_head(&p, 1.5, 2.0);
        assert!((v - (4.0 + 2.0 * (1.5f64.sqrt() - 1.0))).abs() < 1e-14);
    }
}
