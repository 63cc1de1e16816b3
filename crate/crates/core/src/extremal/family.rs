use serde::Serialize;

use super::grid::{disc_space, planar_riesz_operator, Grid1D, RadialOperator1D};
use super::moser::MoserParams;
use crate::error::{Error, Result};
use crate::exponents::ExponentSet;
use crate::measure::{rearrange, FiniteMeasureSpace};
use crate::operator::Operator;
use crate::quadrature::{integrate_adaptive, linear_fit};
use crate::special::sphere_area;
use crate::symbol::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    PhiSequence,
    MoserSequence,
    LogCounterexample,
}

/// A sequence of test functions concentrating at the center `x₀` of
/// `Ω = B(x₀, R)`, with `E_m = B(x₀, r_m)` and `r_m = R·2^{-m}`.
///
/// Supported testbeds: `n = 1` (any kernel, exact cell integration for radial
/// ones) and `n = 2` with the Riesz kernel on a polar mesh.
#[derive(Debug, Clone)]
pub struct ExtremalFamily {
    pub kind: FamilyKind,
    pub kernel: KernelSpec,
    pub center: f64,
    pub radius: f64,
    pub exponents: ExponentSet,
    /// `ν = |x − x₀|^{λ−n} dx`; `λ = n` is Lebesgue measure.
    pub lambda: f64,
    pub moser: Option<MoserParams>,
}

/// Mesh resolution. The mesh reaches `R·2^{-(m_max + extra_levels)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshOptions {
    pub per_shell: usize,
    pub extra_levels: u32,
    /// Angular sectors for `n = 2`.
    pub sectors: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { per_shell: 64, extra_levels: 8, sectors: 16 }
    }
}

/// The family on a concrete mesh: `T: L^{β′}(μ) → (ν)` plus each node's
/// distance to `x₀`.
pub struct Discretization {
    pub operator: Box<dyn Operator>,
    pub mu: FiniteMeasureSpace,
    pub nu: FiniteMeasureSpace,
    pub radii: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl ExtremalFamily {
    /// Riesz kernel `|x−y|^{d−n}` with trace measure exponent `λ`:
    /// `β = n/(n−d)`, `A = ω_{n−1}/n`, `β₀ = λβ/n`.
    pub fn riesz(n: usize, d: f64, lambda: f64) -> Result<Self> {
        Self::from_kernel(FamilyKind::PhiSequence, KernelSpec::riesz(n, d)?, lambda)
    }

    /// `|x−y|^{d−n}(1 + 1/(1 + |log|x−y||))`, Lebesgue measure.
    pub fn log_counterexample(n: usize, d: f64) -> Result<Self> {
        Self::from_kernel(FamilyKind::LogCounterexample, KernelSpec::log_perturbed_riesz(n, d)?, n as f64)
    }

    pub fn moser(n: usize, d: f64, params: MoserParams) -> Result<Self> {
        params.validate(d)?;
        let mut fam = Self::from_kernel(FamilyKind::MoserSequence, KernelSpec::riesz_normalized(n, d)?, n as f64)?;
        fam.moser = Some(params);
        Ok(fam)
    }

    pub fn from_kernel(kind: FamilyKind, kernel: KernelSpec, lambda: f64) -> Result<Self> {
        let n = kernel.dim_n;
        let nf = n as f64;
        if !(lambda > 0.0 && lambda <= nf) {
            return Err(Error::Parameter(format!("lambda must lie in (0, n], got {lambda}")));
        }
        let beta = kernel.p_prime();
        let a = sphere_area(n) / nf;
        let exponents = ExponentSet::new(beta, lambda * beta / nf, 2.0, None, a, a * nf / lambda)?;
        Ok(Self { kind, kernel, center: 0.0, radius: 1.0, exponents, lambda, moser: None })
    }

    pub fn n(&self) -> usize {
        self.kernel.dim_n
    }

    pub fn r_m(&self, m: u32) -> f64 {
        self.radius * 2f64.powi(-(m as i32))
    }

    /// `E_m` must fit inside `Ω`.
    pub fn check_geometry(&self, m: u32) -> Result<f64> {
        let r = self.r_m(m);
        if m == 0 || r >= self.radius {
            return Err(Error::Geometry(format!("E_{m} = B(x0, {r}) is not inside Omega = B(x0, {})", self.radius)));
        }
        Ok(r)
    }

    /// `μ(E_m)`.
    pub fn mu_e(&self, m: u32) -> f64 {
        sphere_area(self.n()) / self.n() as f64 * self.r_m(m).powi(self.n() as i32)
    }

    /// The sharp coefficient `β₀/(Aβ)`.
    pub fn threshold(&self) -> f64 {
        self.exponents.sharp_constant()
    }

    /// Growth exponent of the exponential integral in `log(1/r_m)` for `α`
    /// above threshold: `(αAβ − β₀)(n − d)`.
    pub fn predicted_exponent(&self, alpha: f64) -> f64 {
        let e = &self.exponents;
        (alpha * e.a * e.beta - e.beta0) * (self.n() as f64 - self.kernel.order_d)
    }

    /// Mesh resolving every `E_m` with `m ≤ m_max`.
    pub fn discretize(&self, m_max: u32, mesh: MeshOptions) -> Result<Discretization> {
        self.check_geometry(m_max)?;
        let finest = m_max + mesh.extra_levels;
        match self.n() {
            1 => {
                let grid = Grid1D::dyadic(self.center, self.radius, finest, mesh.per_shell)?;
                let radial = self.kernel.radial().ok_or_else(|| {
                    Error::Unsupported("the 1-D mesh needs a translation-invariant radial kernel".into())
                })?;
                let nu = if self.lambda == 1.0 { grid.lebesgue()? } else { grid.power_measure(self.lambda)? };
                let mu = grid.lebesgue()?;
                let mids = grid.midpoints();
                let radii = mids.iter().map(|x| (x - self.center).abs()).collect();
                let points = mids.iter().map(|&x| vec![x]).collect();
                let op = RadialOperator1D::new(grid, radial, nu.clone())?;
                Ok(Discretization { operator: Box::new(op), mu, nu, radii, points })
            }
            2 => {
                let a = match self.kernel.radial() {
                    Some(crate::symbol::RadialKernel::Power { a }) if self.lambda == 2.0 => a,
                    _ => {
                        return Err(Error::Unsupported(
                            "the disc mesh supports the plain Riesz kernel with Lebesgue measure".into(),
                        ))
                    }
                };
                let space = disc_space(self.radius, finest, mesh.per_shell.min(16), mesh.sectors)?;
                let points: Vec<Vec<f64>> = space.coords().unwrap().to_vec();
                let radii = points.iter().map(|p| p[0].hypot(p[1])).collect();
                let op = planar_riesz_operator(&space, a)?;
                Ok(Discretization { operator: Box::new(op), mu: space.clone(), nu: space, radii, points })
            }
            n => Err(Error::Unsupported(format!("no mesh for n = {n}"))),
        }
    }

    fn x0(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        x[0] = self.center;
        x
    }

    /// `Φ_m(y) = K(x₀, y)|K(x₀, y)|^{β−2}` off `E_m`, zero on it. Vector
    /// kernels give one output per component.
    pub fn build_phi_m_vector(&self, disc: &Discretization, m: u32) -> Result<Vec<Vec<f64>>> {
        let r = self.check_geometry(m)?;
        let x0 = self.x0();
        let b = self.exponents.beta;
        Ok(disc
            .points
            .iter()
            .zip(&disc.radii)
            .map(|(y, &rho)| {
                let k = self.kernel.eval_vector(&x0, y);
                if rho <= r {
                    return vec![0.0; k.len()];
                }
                let norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
                k.iter().map(|v| v * norm.powf(b - 2.0)).collect()
            })
            .collect())
    }

    /// Scalar [`build_phi_m_vector`](Self::build_phi_m_vector).
    pub fn build_phi_m(&self, disc: &Discretization, m: u32) -> Result<Vec<f64>> {
        if self.kernel.is_vector() && self.n() > 1 {
            return Err(Error::Unsupported("use build_phi_m_vector for vector kernels".into()));
        }
        Ok(self.build_phi_m_vector(disc, m)?.into_iter().map(|v| v[0]).collect())
    }

    /// `‖Φ_m‖_{β′}^{β′}` against `log(1/μ(E_m))` over `ms`.
    pub fn norm_law(&self, disc: &Discretization, ms: &[u32]) -> Result<NormLawReport> {
        if ms.len() < 2 {
            return Err(Error::Input("norm law needs at least two m values".into()));
        }
        let bp = self.exponents.beta_prime;
        let mut logs = Vec::with_capacity(ms.len());
        let mut norms = Vec::with_capacity(ms.len());
        for &m in ms {
            let phi = self.build_phi_m(disc, m)?;
            norms.push(disc.mu.lp_norm(&phi, bp).powf(bp));
            logs.push((1.0 / self.mu_e(m)).ln());
        }
        let (_, slope, _) = linear_fit(&logs, &norms);
        let residuals: Vec<f64> = norms.iter().zip(&logs).map(|(v, l)| v - self.exponents.a * l).collect();
        let spread = residuals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - residuals.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(NormLawReport { ms: ms.to_vec(), log_inv_mu_e: logs, norms, residuals, slope, a: self.exponents.a, spread })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormLawReport {
    pub ms: Vec<u32>,
    pub log_inv_mu_e: Vec<f64>,
    /// `‖Φ_m‖_{β′}^{β′}`
    pub norms: Vec<f64>,
    /// `‖Φ_m‖_{β′}^{β′} − A log(1/μ(E_m))`
    pub residuals: Vec<f64>,
    pub slope: f64,
    pub a: f64,
    /// `max − min` of the residuals.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub max_integral: f64,
    /// Max over the probes, per `m`.
    pub by_m: Vec<(u32, f64)>,
}

/// `sup_x ∫_{M∖E_m} |(K(x,y) − K(x₀,y))·K(x₀,y)| |K(x₀,y)|^{β−2} dy` over the
/// probes `x ∈ {x₀, x₀ ± r_m/4, x₀ ± r_m/2}`, for `n = 1`.
pub fn check_kernel_oscillation(family: &ExtremalFamily, ms: &[u32]) -> Result<OscillationReport> {
    if family.n() != 1 {
        return Err(Error::Unsupported("oscillation probing is implemented for n = 1".into()));
    }
    let k = &family.kernel;
    let b = family.exponents.beta;
    let (c, big_r) = (family.center, family.radius);
    let mut by_m = Vec::with_capacity(ms.len());
    for &m in ms {
        let r = family.check_geometry(m)?;
        let mut worst: f64 = 0.0;
        for off in [0.0, 0.25, -0.25, 0.5, -0.5] {
            let x = [c + off * r];
            let integrand = |y: f64| {
                let k0 = k.eval_vector(&[c], &[y]);
                let kx = k.eval_vector(&x, &[y]);
                let norm0 = k0.iter().map(|v| v * v).sum::<f64>().sqrt();
                let dot: f64 = kx.iter().zip(&k0).map(|(p, q)| (p - q) * q).sum();
                dot.abs() * norm0.powf(b - 2.0)
            };
            let mut total = 0.0;
            let mut lo = r;
            while lo < big_r {
                let hi = (2.0 * lo).min(big_r);
                total += integrate_adaptive(|u| integrand(c + u) + integrand(c - u), lo, hi, 1e-12, 1e-9).value;
                lo = hi;
            }
            worst = worst.max(total);
        }
        by_m.push((m, worst));
    }
    let max_integral = by_m.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(OscillationReport { max_integral, by_m })
}

/// `f̃ = ess sup_{M∖E} |f|` on `E`, `f` elsewhere.
pub fn truncate_to_sup(f: &[f64], in_e: &[bool]) -> Result<Vec<f64>> {
    if f.len() != in_e.len() {
        return Err(Error::Input("f and E must have the same length".into()));
    }
    let s0 = f.iter().zip(in_e).filter(|p| !*p.1).map(|p| p.0.abs()).fold(0.0, f64::max);
    Ok(f.iter().zip(in_e).map(|(&v, &e)| if e { s0 } else { v }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    /// `min (f̃*(t) − f*(t))` over probes in `[μ(E), μ(M))`; `≥ 0` when the
    /// domination holds.
    pub min_gap: f64,
    /// `∫_{M∖E} |f̃|^β dμ`
    pub lhs: f64,
    /// `∫_{μ(E)}^{μ(M)} (f̃*)^β dt`
    pub rhs: f64,
}

impl TruncationReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_gap >= -tol && (self.lhs - self.rhs).abs() <= tol * (1.0 + self.lhs.abs())
    }
}

/// Compare `f̃*` with `f*` on `[μ(E), μ(M))` and check the tail integral
/// identity for `f̃`.
pub fn check_truncation(f: &[f64], in_e: &[bool], space: &FiniteMeasureSpace, beta: f64) -> Result<TruncationReport> {
    let mu_e: f64 = space.weights().iter().zip(in_e).filter(|p| *p.1).map(|p| p.0).sum();
    let total = space.total_mass();
    if !(mu_e > 0.0 && mu_e < total) {
        return Err(Error::Input("need 0 < mu(E) < mu(M)".into()));
    }
    let g = truncate_to_sup(f, in_e)?;
    let fs = rearrange(f, space)?;
    let gs = rearrange(&g, space)?;
    let mut ts: Vec<f64> = fs.breakpoints().iter().chain(gs.breakpoints()).copied().filter(|&t| t >= mu_e && t < total).collect();
    ts.push(mu_e);
    ts.push(total);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    // Both profiles are constant between breakpoints, so interval midpoints
    // suffice; breakpoints summed in different orders can differ by an ulp.
    let width = 1e-12 * total;
    let probes: Vec<f64> = ts.windows(2).filter(|w| w[1] - w[0] > width).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut min_gap = f64::INFINITY;
    for t in probes {
        min_gap = min_gap.min(gs.value(t)? - fs.value(t)?);
    }
    let powered: Vec<f64> = g.iter().map(|v| v.abs().powf(beta)).collect();
    let lhs = powered.iter().zip(space.weights()).zip(in_e).filter(|p| !*p.1).map(|((v, w), _)| v * w).sum();
    let ps = rearrange(&powered, space)?;
    let rhs = ps.integral() - ps.integral_to(mu_e);
    Ok(TruncationReport { min_gap, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_phi_is_truncated_power() {
        let fam = ExtremalFamily::riesz(1, 0.5, 1.0).unwrap();
        assert_eq!(fam.exponents.beta, 2.0);
        assert!((fam.threshold() - 0.5).abs() < 1e-15);
        let disc = fam.discretize(10, MeshOptions { per_shell: 16, ..Default::default() }).unwrap();
        let phi = fam.build_phi_m(&disc, 6).unwrap();
        for ((v, &rho), y) in phi.iter().zip(&disc.radii).zip(&disc.points) {
            if rho <= 2f64.powi(-6) {
                assert_eq!(*v, 0.0);
            } else {
                assert!((v - y[0].abs().powf(-0.5)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn geometry_error_when_e_m_too_big() {
        let mut fam = ExtremalFamily::riesz(1, 0.5, 1.0).unwrap();
        assert!(matches!(fam.check_geometry(0), Err(Error::Geometry(_))));
        fam.radius = 0.5;
        assert!(fam.check_geometry(3).is_ok());
    }

    #[test]
    fn beta_three_norm_is_log() {
        // d = 2/3: Φ_m^{β′} = |y|^{-1}, so ‖Φ_m‖^{β′} = 2 log(1/r_m)
        let fam = ExtremalFamily::riesz(1, 2.0 / 3.0, 1.0).unwrap();
        assert!((fam.exponents.beta - 3.0).abs() < 1e-12);
        let disc = fam.discretize(12, MeshOptions::default()).unwrap();
        let bp = fam.exponents.beta_prime;
        for m in [4, 8, 12] {
            let phi = fam.build_phi_m(&disc, m).unwrap();
            let v = disc.mu.lp_norm(&phi, bp).powf(bp);
            let exact = 2.0 * (m as f64) * std::f64::consts::LN_2;
            assert!((v - exact).abs() / exact < 1e-4, "{m}: {v} vs {exact}");
        }
    }

    #[test]
    fn norm_law_slope() {
        let fam = ExtremalFamily::riesz(1, 0.5, 1.0).unwrap();
        let disc = fam.discretize(14, MeshOptions::default()).unwrap();
        let ms: Vec<u32> = (4..=14).collect();
        let rep = fam.norm_law(&disc, &ms).unwrap();
        assert!((rep.slope - 2.0).abs() / 2.0 < 0.02, "{}", rep.slope);
        assert!(rep.spread < 1e-3);
    }

    #[test]
    fn disc_norm_law() {
        let fam = ExtremalFamily::riesz(2, 1.0, 2.0).unwrap();
        let disc = fam.discretize(8, MeshOptions { per_shell: 8, extra_levels: 2, sectors: 8 }).unwrap();
        let rep = fam.norm_law(&disc, &[3, 4, 5, 6, 7, 8]).unwrap();
        assert!((rep.slope - std::f64::consts::PI).abs() / std::f64::consts::PI < 0.02, "{}", rep.slope);
    }

    #[test]
    fn condition_d_bounded_for_riesz() {
        let fam = ExtremalFamily::riesz(1, 0.5, 1.0).unwrap();
        let rep = check_kernel_oscillation(&fam, &[4, 8, 12, 16]).unwrap();
        let v: Vec<f64> = rep.by_m.iter().map(|p| p.1).collect();
        assert!(rep.max_integral.is_finite() && rep.max_integral < 1.0);
        // scale invariance of the Riesz kernel: the sup settles as m grows
        assert!((v[3] - v[2]).abs() < 0.01 * v[3], "{v:?}");
        assert!((v[3] - v[2]).abs() < (v[2] - v[1]).abs(), "{v:?}");
    }

    #[test]
    fn condition_d_vanishes_for_x_independent_kernel() {
        let k = KernelSpec::custom(1, 0.5, |_, y| y[0].abs().powf(-0.5)).unwrap();
        let fam = ExtremalFamily::from_kernel(FamilyKind::PhiSequence, k, 1.0).unwrap();
        let rep = check_kernel_oscillation(&fam, &[4, 8]).unwrap();
        assert_eq!(rep.max_integral, 0.0);
    }

    #[test]
    fn condition_d_vector_kernel() {
        let fam =
            ExtremalFamily::from_kernel(FamilyKind::PhiSequence, KernelSpec::vector_riesz(1, 0.5).unwrap(), 1.0).unwrap();
        let rep = check_kernel_oscillation(&fam, &[4, 8, 12, 16]).unwrap();
        let (a, b) = (rep.by_m[2].1, rep.by_m[3].1);
        assert!(rep.max_integral.is_finite());
        assert!((a - b).abs() < 0.01 * b, "{:?}", rep.by_m);
    }

    #[test]
    fn truncation_on_small_instance() {
        let space = FiniteMeasureSpace::atomic(vec![0.5, 1.0, 0.25, 2.0]).unwrap();
        let f = [3.0, -1.0, 0.5, 2.0];
        let in_e = [true, false, false, true];
        assert_eq!(truncate_to_sup(&f, &in_e).unwrap(), vec![1.0, -1.0, 0.5, 1.0]);
        let rep = check_truncation(&f, &in_e, &space, 2.0).unwrap();
        assert!(rep.holds(1e-12), "{rep:?}");
    }
}
