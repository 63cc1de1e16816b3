//! The one-dimensional Adams–Garsia functional with the perturbed weight
//! `g(x,y) = 1 + H(1+|x|)^{−γ}` for `x ≤ y` and `H e^{(y−x)/q}` for `x > y`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, linear_fit};

/// Nonnegative step function: `heights[k]` on `[edges[k], edges[k+1])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    edges: Vec<f64>,
    heights: Vec<f64>,
}

impl StepFunction {
    pub fn new(edges: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if edges.len() != heights.len() + 1 {
            return Err(Error::Input("need one more edge than heights".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("edges must be finite and strictly increasing".into()));
        }
        if heights.iter().any(|&h| !(h >= 0.0 && h.is_finite())) {
            return Err(Error::Input("heights must be finite and nonnegative".into()));
        }
        Ok(Self { edges, heights })
    }

    /// `φ ≡ 0`, represented by a single zero step at `y1`.
    pub fn zero(y1: f64) -> Self {
        Self { edges: vec![y1, y1 + 1.0], heights: vec![0.0] }
    }

    /// `L^{−1/β′} χ_{[a, a+L]}`, unit `L^{β′}` norm.
    pub fn block(a: f64, len: f64, beta_prime: f64) -> Result<Self> {
        Self::new(vec![a, a + len], vec![len.powf(-1.0 / beta_prime)])
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn start(&self) -> f64 {
        self.edges[0]
    }

    /// Right end of the support.
    pub fn end(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn value(&self, x: f64) -> f64 {
        if x < self.start() || x >= self.end() {
            return 0.0;
        }
        let k = self.edges.partition_point(|&e| e <= x) - 1;
        self.heights[k]
    }

    /// `∫ φ^{p}`.
    pub fn norm_pow(&self, p: f64) -> f64 {
        self.steps().map(|(a, b, h)| h.powf(p) * (b - a)).sum()
    }

    /// Rescaled so that `∫ φ^{p} = 1`; zero stays zero.
    pub fn normalized(&self, p: f64) -> Self {
        let norm = self.norm_pow(p);
        if norm == 0.0 {
            return self.clone();
        }
        let c = norm.powf(-1.0 / p);
        Self { edges: self.edges.clone(), heights: self.heights.iter().map(|h| h * c).collect() }
    }

    fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.edges.windows(2).zip(&self.heights).map(|(w, &h)| (w[0], w[1], h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GarsiaParams {
    pub y1: f64,
    pub h: f64,
    pub beta: f64,
    pub gamma: f64,
    pub q: f64,
}

impl Default for GarsiaParams {
    fn default() -> Self {
        Self { y1: 0.0, h: 1.0, beta: 2.0, gamma: 2.0, q: 2.0 }
    }
}

impl GarsiaParams {
    pub fn beta_prime(&self) -> f64 {
        self.beta / (self.beta - 1.0)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.y1.is_finite() && self.h >= 0.0 && self.h.is_finite() && self.beta > 1.0 && self.gamma > 1.0 && self.q > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("need H >= 0, beta > 1, gamma > 1, q > 0, got {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarsiaInstance {
    pub params: GarsiaParams,
    pub phi: StepFunction,
}

/// `∫_0^x (1+|t|)^{−γ} dt`, odd in `x`.
fn weight_antiderivative(x: f64, gamma: f64) -> f64 {
    x.signum() * (1.0 - (1.0 + x.abs()).powf(1.0 - gamma)) / (gamma - 1.0)
}

impl GarsiaInstance {
    pub fn new(params: GarsiaParams, phi: StepFunction) -> Result<Self> {
        params.validate()?;
        if phi.start() < params.y1 {
            return Err(Error::Input(format!("phi starts at {} before y1 = {}", phi.start(), params.y1)));
        }
        let norm = phi.norm_pow(params.beta_prime());
        if norm > 1.0 + 1e-12 {
            return Err(Error::Input(format!("int phi^beta' = {norm} exceeds 1")));
        }
        Ok(Self { params, phi })
    }

    /// `∫ g(x,y) φ(x) dx`, exact on every step.
    pub fn inner_integral(&self, y: f64) -> f64 {
        let GarsiaParams { h, gamma, q, .. } = self.params;
        self.phi
            .steps()
            .map(|(a, b, height)| {
                if height == 0.0 {
                    return 0.0;
                }
                let mut s = 0.0;
                let left_end = b.min(y);
                if left_end > a {
                    s += (left_end - a) + h * (weight_antiderivative(left_end, gamma) - weight_antiderivative(a, gamma));
                }
                let right_start = a.max(y);
                if b > right_start {
                    s += q * h * (((y - right_start) / q).exp() - ((y - b) / q).exp());
                }
                height * s
            })
            .sum()
    }

    /// `F(y) = y − (∫ g(x,y) φ(x) dx)^β` for `y ≥ y1`.
    pub fn eval_f(&self, y: f64) -> f64 {
        y - self.inner_integral(y).powf(self.params.beta)
    }

    /// Beyond the support `F(y) = y − I_∞^β` with `I_∞ = ∫(1+H(1+|x|)^{−γ})φ`.
    fn tail_offset(&self) -> f64 {
        self.inner_integral(self.phi.end()).powf(self.params.beta)
    }

    /// Integration breakpoints in `[y1, y_max]`.
    fn breakpoints(&self, y_max: f64) -> Vec<f64> {
        let y1 = self.params.y1;
        let mut pts = vec![y1];
        pts.extend(self.phi.edges.iter().copied().filter(|&e| e > y1 && e < y_max));
        if y_max > y1 {
            pts.push(y_max);
        }
        pts.dedup();
        pts
    }

    /// A `y_max` past which `e^{−F}` is below `1e-13`.
    pub fn default_y_max(&self) -> f64 {
        self.phi.end().max(self.params.y1) + self.tail_offset().max(0.0) + 30.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GarsiaIntegral {
    /// `∫_{y1}^{y_max} e^{−F}`.
    pub value: f64,
    /// Upper bound for `∫_{y_max}^∞ e^{−F}` (exact once past the support).
    pub tail_bound: f64,
}

impl GarsiaIntegral {
    pub fn total(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// `∫_{y1}^{y_max} e^{−F(y)} dy`, piecewise adaptive between the edges of `φ`.
pub fn garsia_integral(inst: &GarsiaInstance, y_max: f64) -> Result<GarsiaIntegral> {
    let y1 = inst.params.y1;
    if !(y_max > y1) {
        return Err(Error::Input(format!("y_max = {y_max} must exceed y1 = {y1}")));
    }
    let end_value = (-inst.eval_f(y_max)).exp();
    if end_value > 1e-12 {
        return Err(Error::Inconclusive(format!("e^-F(y_max) = {end_value:.3e} has not decayed; raise y_max")));
    }
    let value: f64 = inst
        .breakpoints(y_max)
        .windows(2)
        .map(|w| integrate_adaptive(|y| (-inst.eval_f(y)).exp(), w[0], w[1], 1e-14, 1e-11).value)
        .sum();
    let tail_bound = if y_max >= inst.phi.end() {
        (inst.tail_offset() - y_max).exp()
    } else {
        // I(y) ≤ (1 + H) ∫φ on [y_max, ∞)
        let l1: f64 = inst.phi.steps().map(|(a, b, h)| h * (b - a)).sum();
        (((1.0 + inst.params.h) * l1).powf(inst.params.beta) - y_max).exp()
    };
    Ok(GarsiaIntegral { value, tail_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimsReport {
    pub inf_f: f64,
    /// `(λ, |E_λ|)` with `E_λ = {y ≥ y1: F(y) ≤ λ}`.
    pub e_lambda_measure: Vec<(f64, f64)>,
    /// Slope of the linear fit of `|E_λ|` against `λ` over nonempty `E_λ`.
    pub linear_fit_slope: f64,
}

/// `inf F` on a dense grid over the support and `|E_λ|` by linear
/// interpolation between grid values, exact beyond the support.
pub fn verify_claims(inst: &GarsiaInstance, lambda_grid: &[f64]) -> Result<ClaimsReport> {
    if lambda_grid.len() < 2 {
        return Err(Error::Input("need at least two lambda values".into()));
    }
    let y1 = inst.params.y1;
    let end = inst.phi.end().max(y1);
    let span = end - y1;
    let cells = ((200.0 * span).ceil() as usize).clamp(2000, 200_000);
    let ys: Vec<f64> = (0..=cells).map(|i| y1 + span * i as f64 / cells as f64).collect();
    let fs: Vec<f64> = ys.par_iter().map(|&y| inst.eval_f(y)).collect();
    let inf_f = fs.iter().copied().fold(f64::INFINITY, f64::min);
    let offset = inst.tail_offset();
    let e_lambda_measure: Vec<(f64, f64)> = lambda_grid
        .iter()
        .map(|&lam| {
            let mut m = 0.0;
            if span > 0.0 {
                for i in 0..cells {
                    let (fa, fb) = (fs[i], fs[i + 1]);
                    let h = ys[i + 1] - ys[i];
                    m += if fa <= lam && fb <= lam {
                        h
                    } else if fa > lam && fb > lam {
                        0.0
                    } else {
                        h * (lam - fa.min(fb)) / (fa - fb).abs()
                    };
                }
            }
            // F(y) = y − offset for y ≥ end
            m += (lam + offset - end).max(0.0);
            (lam, m)
        })
        .collect();
    let (xs, ms): (Vec<f64>, Vec<f64>) = e_lambda_measure.iter().filter(|(_, m)| *m > 0.0).copied().unzip();
    let linear_fit_slope = if xs.len() >= 2 { linear_fit(&xs, &ms).1 } else { 0.0 };
    Ok(ClaimsReport { inf_f, e_lambda_measure, linear_fit_slope })
}

/// Default `λ` grid spanning `[−10, 50]`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=60).map(|i| -10.0 + i as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiFamily {
    IndicatorBlock,
    GeometricDecay,
    RandomSteps,
}

/// A random admissible `φ` from `family`, renormalized to `∫φ^{β′} = 1`.
pub fn random_phi(rng: &mut ChaCha8Rng, params: &GarsiaParams, family: PhiFamily) -> StepFunction {
    let bp = params.beta_prime();
    let start = params.y1 + rng.random_range(0.0..5.0);
    match family {
        PhiFamily::IndicatorBlock => {
            let len = 10f64.powf(rng.random_range(-1.0..2.0));
            StepFunction::block(start, len, bp).expect("positive length")
        }
        PhiFamily::GeometricDecay => {
            let steps = rng.random_range(2..=32);
            let ratio: f64 = rng.random_range(0.3..0.98);
            let width = rng.random_range(0.2..3.0);
            let edges = (0..=steps).map(|k| start + width * k as f64).collect();
            let heights = (0..steps).map(|k| ratio.powi(k)).collect();
            StepFunction::new(edges, heights).expect("valid steps").normalized(bp)
        }
        PhiFamily::RandomSteps => {
            let steps = rng.random_range(1..=64);
            let mut edges = vec![start];
            for _ in 0..steps {
                let w = rng.random_range(0.05..3.0);
                edges.push(edges.last().unwrap() + w);
            }
            let heights = (0..steps).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) }).collect();
            let phi = StepFunction::new(edges, heights).expect("valid steps");
            if phi.norm_pow(bp) == 0.0 {
                StepFunction::block(start, 1.0, bp).expect("positive length")
            } else {
                phi.normalized(bp)
            }
        }
    }
}

/// The `i`-th instance of the deterministic family with master `seed`; the
/// three families alternate.
pub fn family_instance(params: &GarsiaParams, seed: u64, i: usize) -> GarsiaInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64 + 1);
    let family = [PhiFamily::IndicatorBlock, PhiFamily::GeometricDecay, PhiFamily::RandomSteps][i % 3];
    let phi = random_phi(&mut rng, params, family);
    GarsiaInstance::new(*params, phi).expect("renormalized phi is admissible")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilySweep {
    pub size: usize,
    pub max_integral: f64,
    pub min_inf_f: f64,
    pub max_level_slope: f64,
    /// `max |E_λ| / (1 + |λ|)` over the family and the `λ` grid.
    pub max_e_ratio: f64,
}

/// Garsia integral and both claims over the first `size` family instances.
pub fn family_sweep(params: &GarsiaParams, size: usize, seed: u64) -> Result<FamilySweep> {
    params.validate()?;
    if size == 0 {
        return Err(Error::Input("family size must be positive".into()));
    }
    let lambdas = default_lambda_grid();
    let rows: Vec<(f64, f64, f64, f64)> = (0..size)
        .into_par_iter()
        .map(|i| {
            let inst = family_instance(params, seed, i);
            let integral = garsia_integral(&inst, inst.default_y_max())?.total();
            let claims = verify_claims(&inst, &lambdas)?;
            let ratio = claims.e_lambda_measure.iter().map(|(l, m)| m / (1.0 + l.abs())).fold(0.0, f64::max);
            Ok((integral, claims.inf_f, claims.linear_fit_slope, ratio))
        })
        .collect::<Result<_>>()?;
    Ok(FamilySweep {
        size,
        max_integral: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        min_inf_f: rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        max_level_slope: rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max),
        max_e_ratio: rows.iter().map(|r| r.3).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(phi: StepFunction) -> GarsiaInstance {
        GarsiaInstance::new(GarsiaParams::default(), phi).unwrap()
    }

    #[test]
    fn zero_phi() {
        let g = inst(StepFunction::zero(0.0));
        assert_eq!(g.eval_f(3.5), 3.5);
        let v = garsia_integral(&g, g.default_y_max()).unwrap();
        assert!((v.total() - 1.0).abs() < 1e-12, "{v:?}");
        let c = verify_claims(&g, &default_lambda_grid()).unwrap();
        assert_eq!(c.inf_f, 0.0);
        assert!((c.linear_fit_slope - 1.0).abs() < 1e-12);
        for &(l, m) in &c.e_lambda_measure {
            assert!((m - l.max(0.0)).abs() < 1e-9, "{l} {m}");
        }
    }

    #[test]
    fn unweighted_block() {
        let p = GarsiaParams { h: 0.0, ..GarsiaParams::default() };
        let g = GarsiaInstance::new(p, StepFunction::new(vec![0.0, 1.0], vec![1.0]).unwrap()).unwrap();
        for &y in &[0.25, 0.5, 1.0, 3.0] {
            let expect = y - f64::min(y, 1.0).powi(2);
            assert!((g.eval_f(y) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn inner_integral_matches_quadrature() {
        let p = GarsiaParams::default();
        for i in 0..12 {
            let g = family_instance(&p, 7, i);
            for &y in &[0.0, 0.7, 2.3, 5.1, 11.0, 40.0] {
                let oracle: f64 = g
                    .phi
                    .steps()
                    .map(|(a, b, h)| {
                        let w = |x: f64| if x <= y { 1.0 + p.h * (1.0 + x.abs()).powf(-p.gamma) } else { p.h * ((y - x) / p.q).exp() };
                        let mut s = 0.0;
                        for (u, v) in [(a, b.min(y)), (a.max(y), b)] {
                            if v > u {
                                s += integrate_adaptive(|x| h * w(x), u, v, 1e-15, 1e-13).value;
                            }
                        }
                        s
                    })
                    .sum();
                let got = g.inner_integral(y);
                assert!((got - oracle).abs() <= 1e-9 * oracle.max(1.0), "i={i} y={y}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn admissibility_enforced() {
        let phi = StepFunction::new(vec![0.0, 1.0], vec![2.0]).unwrap();
        assert!(GarsiaInstance::new(GarsiaParams::default(), phi).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0], vec![-1.0]).is_err());
        let early = StepFunction::new(vec![-1.0, 0.0], vec![0.5]).unwrap();
        assert!(GarsiaInstance::new(GarsiaParams::default(), early).is_err());
    }

    #[test]
    fn short_y_max_is_inconclusive() {
        let g = inst(StepFunction::block(0.0, 4.0, 2.0).unwrap());
        assert!(matches!(garsia_integral(&g, 3.0), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn moser_blocks_stay_bounded() {
        let vals: Vec<f64> = [1.0, 10.0, 100.0, 1000.0]
            .iter()
            .map(|&l| {
                let g = inst(StepFunction::block(0.0, l, 2.0).unwrap());
                garsia_integral(&g, g.default_y_max()).unwrap().total()
            })
            .collect();
        assert!(vals.iter().all(|v| v.is_finite() && *v < 100.0), "{vals:?}");
    }

    #[test]
    fn families_are_admissible() {
        let p = GarsiaParams::default();
        for i in 0..60 {
            let g = family_instance(&p, 1, i);
            assert!((g.phi.norm_pow(2.0) - 1.0).abs() < 1e-12);
        }
    }
}
