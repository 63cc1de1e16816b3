use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;
use crate::special::riesz_c_d;

pub type PointFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Translation-invariant radial kernels `k(ρ)`, `ρ = |x − y|`, with exact
/// (or Gauss-in-`log ρ`) antiderivatives for product integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialKernel {
    /// `ρ^{-a}`
    Power { a: f64 },
    /// `ρ^{-a} (1 + 1/(1 + |log ρ|))`
    LogPerturbed { a: f64 },
}

impl RadialKernel {
    pub fn exponent(&self) -> f64 {
        match *self {
            RadialKernel::Power { a } | RadialKernel::LogPerturbed { a } => a,
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        match *self {
            RadialKernel::Power { a } => rho.powf(-a),
            RadialKernel::LogPerturbed { a } => rho.powf(-a) * (1.0 + 1.0 / (1.0 + rho.ln().abs())),
        }
    }

    /// `∫_{ρ1}^{ρ2} k(ρ) dρ` for `0 ≤ ρ1 ≤ ρ2`.
    pub fn integral(&self, rho1: f64, rho2: f64) -> f64 {
        if rho2 <= rho1 {
            return 0.0;
        }
        let a = self.exponent();
        let power = if (a - 1.0).abs() < 1e-15 {
            (rho2 / rho1).ln()
        } else {
            (rho2.powf(1.0 - a) - rho1.powf(1.0 - a)) / (1.0 - a)
        };
        match self {
            RadialKernel::Power { .. } => power,
            RadialKernel::LogPerturbed { .. } => power + log_perturbation(a, rho1, rho2),
        }
    }

    /// `∫_{ρ1}^{ρ2} k(ρ) ρ^{m} dρ`, the radial shell integral in `m + 1`
    /// dimensions (without the sphere factor).
    pub fn shell_integral(&self, rho1: f64, rho2: f64, m: usize) -> f64 {
        if m == 0 {
            return self.integral(rho1, rho2);
        }
        let shifted = match *self {
            RadialKernel::Power { a } => RadialKernel::Power { a: a - m as f64 },
            RadialKernel::LogPerturbed { a } => RadialKernel::LogPerturbed { a: a - m as f64 },
        };
        shifted.integral(rho1, rho2)
    }
}

/// `∫_{ρ1}^{ρ2} ρ^{-a}/(1+|log ρ|) dρ` via Gauss–Legendre in `t = log ρ`.
fn log_perturbation(a: f64, rho1: f64, rho2: f64) -> f64 {
    let c = 1.0 - a;
    let hi = rho2.ln();
    let lo = if rho1 > 0.0 { rho1.ln() } else { hi.min(0.0) - 45.0 / c };
    let lo = lo.max(hi - 45.0 / c).min(hi);
    let f = |t: f64| (c * t).exp() / (1.0 + t.abs());
    let rule = GaussRule::new(8);
    let mut s = 0.0;
    let mut piece = |u: f64, v: f64| {
        if v > u {
            let panels = ((v - u) / 0.5).ceil() as usize;
            s += rule.composite(u, v, panels, f);
        }
    };
    if lo < 0.0 && hi > 0.0 {
        piece(lo, 0.0);
        piece(0.0, hi);
    } else {
        piece(lo, hi);
    }
    s
}

/// A kernel `K(x, y)` on `R^n` of order `d`, with an optional leading
/// homogeneous profile: `K(x,y) = g(x, (y−x)/|y−x|) |x−y|^{d−n} + O(|x−y|^{d−n+ε})`.
#[derive(Clone)]
pub struct KernelSpec {
    pub dim_n: usize,
    pub order_d: f64,
    evaluator: PointFn,
    leading_profile: Option<PointFn>,
    vector: Option<VectorFn>,
    pub error_exponent: f64,
    pub holder_sigma: Option<f64>,
    radial: Option<RadialKernel>,
}

impl std::fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelSpec")
            .field("dim_n", &self.dim_n)
            .field("order_d", &self.order_d)
            .field("has_profile", &self.leading_profile.is_some())
            .field("vector", &self.vector.is_some())
            .field("radial", &self.radial)
            .finish()
    }
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

impl KernelSpec {
    fn check(n: usize, d: f64) -> Result<()> {
        if n == 0 || !(d > 0.0 && d < n as f64) {
            return Err(Error::Domain(format!("kernel needs 0 < d < n, got n={n}, d={d}")));
        }
        Ok(())
    }

    /// General kernel from an evaluator.
    pub fn custom(n: usize, d: f64, evaluator: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::check(n, d)?;
        Ok(Self {
            dim_n: n,
            order_d: d,
            evaluator: Arc::new(evaluator),
            leading_profile: None,
            vector: None,
            error_exponent: 1.0,
            holder_sigma: None,
            radial: None,
        })
    }

    /// Unnormalized Riesz kernel `|x−y|^{d−n}`; profile `g ≡ 1`.
    pub fn riesz(n: usize, d: f64) -> Result<Self> {
        Self::check(n, d)?;
        let a = n as f64 - d;
        let mut k = Self::custom(n, d, move |x, y| dist(x, y).powf(-a))?;
        k.leading_profile = Some(Arc::new(|_, _| 1.0));
        k.radial = Some(RadialKernel::Power { a });
        k.holder_sigma = Some(1.0);
        Ok(k)
    }

    /// Riesz potential kernel `c_d |x−y|^{d−n}`.
    pub fn riesz_normalized(n: usize, d: f64) -> Result<Self> {
        let c = riesz_c_d(n, d)?;
        let a = n as f64 - d;
        let mut k = Self::custom(n, d, move |x, y| c * dist(x, y).powf(-a))?;
        k.leading_profile = Some(Arc::new(move |_, _| c));
        Ok(k)
    }

    /// `g(x, ω) |x−y|^{d−n}` with `ω = (y−x)/|y−x|`.
    pub fn with_profile(n: usize, d: f64, g: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::check(n, d)?;
        let a = n as f64 - d;
        let g: PointFn = Arc::new(g);
        let g2 = g.clone();
        let mut k = Self::custom(n, d, move |x, y| {
            let r = dist(x, y);
            let omega: Vec<f64> = y.iter().zip(x).map(|(b, a)| (b - a) / r).collect();
            g2(x, &omega) * r.powf(-a)
        })?;
        k.leading_profile = Some(g);
        Ok(k)
    }

    /// `|x−y|^{d−n} (1 + 1/(1 + |log|x−y||))`: same leading profile as Riesz
    /// but a remainder that is only logarithmically smaller.
    pub fn log_perturbed_riesz(n: usize, d: f64) -> Result<Self> {
        Self::check(n, d)?;
        let a = n as f64 - d;
        let rk = RadialKernel::LogPerturbed { a };
        let mut k = Self::custom(n, d, move |x, y| rk.value(dist(x, y)))?;
        k.leading_profile = Some(Arc::new(|_, _| 1.0));
        k.radial = Some(rk);
        k.error_exponent = 0.0;
        Ok(k)
    }

    /// Vector kernel `|x−y|^{d−n−1}(x−y)`; scalar evaluator is its length.
    pub fn vector_riesz(n: usize, d: f64) -> Result<Self> {
        Self::check(n, d)?;
        let a = n as f64 - d;
        let mut k = Self::custom(n, d, move |x, y| dist(x, y).powf(-a))?;
        k.vector = Some(Arc::new(move |x, y| {
            let r = dist(x, y);
            let s = r.powf(-a - 1.0);
            x.iter().zip(y).map(|(a, b)| (a - b) * s).collect()
        }));
        k.leading_profile = Some(Arc::new(|_, _| 1.0));
        Ok(k)
    }

    pub fn with_error_exponent(mut self, eps: f64) -> Self {
        self.error_exponent = eps;
        self
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.evaluator)(x, y)
    }

    /// Vector value if the kernel is vector-valued, else the scalar as a
    /// one-component vector.
    pub fn eval_vector(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match &self.vector {
            Some(v) => v(x, y),
            None => vec![self.eval(x, y)],
        }
    }

    pub fn is_vector(&self) -> bool {
        self.vector.is_some()
    }

    pub fn profile(&self, x: &[f64], omega: &[f64]) -> Option<f64> {
        self.leading_profile.as_ref().map(|g| g(x, omega))
    }

    pub fn has_profile(&self) -> bool {
        self.leading_profile.is_some()
    }

    pub fn radial(&self) -> Option<RadialKernel> {
        self.radial
    }

    /// `p′ = n/(n−d)`.
    pub fn p_prime(&self) -> f64 {
        self.dim_n as f64 / (self.dim_n as f64 - self.order_d)
    }

    /// Largest observed `|K − g|x−y|^{d−n}| / |x−y|^{d−n+ε}` over random
    /// pairs in the cube `[-1,1]^n` at separations down to `1e-6`.
    pub fn expansion_constant(&self, rng: &mut ChaCha8Rng, samples: usize) -> Result<f64> {
        let g = self
            .leading_profile
            .as_ref()
            .ok_or_else(|| Error::Input("kernel has no leading profile".into()))?;
        let n = self.dim_n;
        let a = n as f64 - self.order_d;
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
            let mut dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            dir.iter_mut().for_each(|v| *v /= len);
            let r = 10f64.powf(rng.random_range(-6.0..-0.3));
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + r * b).collect();
            // use the separation actually represented in floating point
            let r = dist(&x, &y);
            let dir: Vec<f64> = y.iter().zip(&x).map(|(b, a)| (b - a) / r).collect();
            let lead = g(&x, &dir) * r.powf(-a);
            let err = (self.eval(&x, &y) - lead).abs() / r.powf(-a + self.error_exponent);
            worst = worst.max(err);
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use rand::SeedableRng;

    #[test]
    fn radial_power_integral() {
        let k = RadialKernel::Power { a: 0.5 };
        assert!((k.integral(0.0, 4.0) - 4.0).abs() < 1e-14);
        assert!((k.integral(1.0, 4.0) - 2.0).abs() < 1e-14);
        let k1 = RadialKernel::Power { a: 1.0 };
        assert!((k1.integral(1.0, std::f64::consts::E) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radial_log_integral_matches_adaptive() {
        let k = RadialKernel::LogPerturbed { a: 0.5 };
        for &(r1, r2) in &[(0.0, 1e-6), (0.0, 0.5), (1e-3, 2e-3), (0.3, 1.7), (0.0, 2.0)] {
            let exact = k.integral(r1, r2);
            // substitute ρ = u² to remove the endpoint singularity
            let oracle = integrate_adaptive(|u: f64| 2.0 * u * k.value(u * u), r1.sqrt(), r2.sqrt(), 1e-15, 1e-13).value;
            assert!(((exact - oracle) / oracle).abs() < 1e-9, "{r1} {r2}: {exact} vs {oracle}");
        }
    }

    #[test]
    fn riesz_has_zero_remainder() {
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(k.expansion_constant(&mut rng, 200).unwrap() < 1e-9);
        assert!(KernelSpec::riesz(2, 2.0).is_err());
    }

    #[test]
    fn log_perturbation_is_not_power_small() {
        let k = KernelSpec::log_perturbed_riesz(1, 0.5).unwrap().with_error_exponent(0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // remainder ~ r^{d-n}/log(1/r) is not O(r^{d-n+0.2}): the constant is large
        assert!(k.expansion_constant(&mut rng, 500).unwrap() > 1.0);
    }
}
