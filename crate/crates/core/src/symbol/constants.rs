use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use super::report::{Method, RouteValue, SharpConstantReport};
use super::spec::{HomogeneousPoly, MatrixField, SphereFn, SymbolFamily, SymbolSpec};
use crate::error::{Error, Result};
use crate::montecarlo::{importance_sample, GaussianProposal, McEstimate, DEFAULT_SEED};
use crate::optimize::{maximize, minimize, SearchDomain, SearchOptions};
use crate::quadrature::{sphere_integrate, GaussRule, SphereRule};
use crate::special::{radial_exp_integral, riesz_c_d, sphere_area};

const INJECTIVITY: &str = "injectivity of P and P* (needed for sharpness) is not certified";

fn coarse_nodes(n: usize) -> usize {
    match n {
        0..=2 => 64,
        3 => 16,
        _ => 8,
    }
}

/// `|∇(c_{d+1}|x|^{d+1−n})| = c_{d+1}(n−d−1)|x|^{d−n}`, written without the
/// removable singularity at `d = n−1`.
pub(crate) fn gradient_riesz_coefficient(n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    (ln_gamma((nf - df + 1.0) / 2.0) - df * std::f64::consts::LN_2 - nf / 2.0 * PI.ln() - ln_gamma((df + 1.0) / 2.0)).exp()
}

/// Sharp constant for `Δ^{d/2}` (d even) or `∇Δ^{(d−1)/2}` (d odd) with a
/// trace measure of order `λ`: `λ c^{−p′}/ω_{n−1}`, `p′ = n/(n−d)`.
pub fn adams_trace_constant(n: usize, d: usize, lambda: f64) -> Result<SharpConstantReport> {
    if d == 0 || d >= n {
        return Err(Error::Domain(format!("need 0 < d < n, got n={n}, d={d}")));
    }
    let nf = n as f64;
    if !(lambda > 0.0 && lambda <= nf) {
        return Err(Error::Domain(format!("need 0 < lambda <= n, got {lambda}")));
    }
    let p_prime = nf / (nf - d as f64);
    let coef = if d % 2 == 0 { riesz_c_d(n, d as f64)? } else { gradient_riesz_coefficient(n, d) };
    let a = sphere_area(n) / nf * coef.powf(p_prime);
    let formula = if d % 2 == 0 {
        "lambda * c_d^(-p') / omega_{n-1}, p' = n/(n-d)"
    } else {
        "(lambda / omega_{n-1}) * (c_{d+1} (n-d-1))^(-p'), p' = n/(n-d)"
    };
    Ok(SharpConstantReport::new(a, p_prime, lambda / nf, Method::ClosedForm, formula))
}

/// A sphere profile `g(x, ω)`; `x_dependent = false` skips the search in `x`.
#[derive(Clone)]
pub struct SphereProfile {
    pub n: usize,
    pub g: SphereFn,
    pub x_dependent: bool,
}

impl SphereProfile {
    pub fn constant_in_x(n: usize, g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { n, g: Arc::new(move |_, w| g(w)), x_dependent: false }
    }

    pub fn new(n: usize, g: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { n, g: Arc::new(g), x_dependent: true }
    }
}

/// The profile `−c₂ det(A)^{-1/2} |A^{-1/2} ω|^{2−n}` of the fundamental
/// solution of `Σ a_jk ∂_j∂_k` with constant SPD `A`.
pub fn second_order_profile(a: &DMatrix<f64>) -> Result<SphereProfile> {
    let n = a.nrows();
    let inv_sqrt = spd_power(a, -0.5)?;
    let det = a.determinant();
    let c2 = riesz_c_d(n, 2.0)?;
    let k = -c2 / det.sqrt();
    Ok(SphereProfile::constant_in_x(n, move |w| {
        let v = &inv_sqrt * nalgebra::DVector::from_column_slice(w);
        k * v.norm().powf(2.0 - n as f64)
    }))
}

/// `A^s` for symmetric positive definite `A`.
pub fn spd_power(a: &DMatrix<f64>, s: f64) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() || a.clone().cholesky().is_none() {
        return Err(Error::Input("matrix is not symmetric positive definite".into()));
    }
    let eig = SymmetricEigen::new(a.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.powf(s)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

fn domain_center(domain: &SearchDomain) -> Vec<f64> {
    domain.lo.iter().zip(&domain.hi).map(|(l, h)| 0.5 * (l + h)).collect()
}

/// `A = (1/n) sup_x ∫_{S^{n−1}} |g(x, ω)|^{p′} dω`, constant `A^{-1}`.
pub fn potential_constant_from_profile(
    profile: &SphereProfile,
    d: f64,
    domain: &SearchDomain,
    opts: SearchOptions,
    rel_tol: f64,
) -> Result<SharpConstantReport> {
    let n = profile.n;
    let nf = n as f64;
    if !(d > 0.0 && d < nf) {
        return Err(Error::Domain(format!("need 0 < d < n, got n={n}, d={d}")));
    }
    let p_prime = nf / (nf - d);
    let g = profile.g.clone();
    let x_star = if profile.x_dependent {
        let coarse = SphereRule::new(n, coarse_nodes(n));
        let g2 = g.clone();
        maximize(move |x| coarse.integrate(|w| g2(x, w).abs().powf(p_prime)), domain, opts)?.x
    } else {
        if domain.grid(1).is_empty() {
            return Err(Error::Parameter("empty search grid".into()));
        }
        domain_center(domain)
    };
    let integral = sphere_integrate(n, rel_tol, |w| g(&x_star, w).abs().powf(p_prime));
    let a = integral.value / nf;
    let mut r = SharpConstantReport::new(a, p_prime, 1.0, Method::SphereQuadrature, "A = (1/n) sup_x int_{S^{n-1}} |g(x,w)|^{p'} dw; constant 1/A");
    r.error_estimate = integral.error / integral.value;
    r.extremizer = Some(x_star);
    Ok(r)
}

/// Options for the `p = 2` routes.
#[derive(Debug, Clone, Copy)]
pub struct P2Options {
    pub samples: usize,
    pub batches: usize,
    pub seed: u64,
    pub sphere_tol: f64,
    pub search: SearchOptions,
}

impl Default for P2Options {
    fn default() -> Self {
        Self { samples: 4_000_000, batches: 64, seed: DEFAULT_SEED, sphere_tol: 1e-10, search: SearchOptions::default() }
    }
}

/// Least-squares quadratic form `Q` with `ω^T Q ω ≈ S(ω)^{1/d}` on the
/// sphere, clipped to be positive definite.
fn fit_quadratic_form(n: usize, d: f64, s: &dyn Fn(&[f64]) -> f64) -> DMatrix<f64> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let m = pairs.len();
    let mut ata = DMatrix::<f64>::zeros(m, m);
    let mut atb = nalgebra::DVector::<f64>::zeros(m);
    SphereRule::new(n, 8.max(2 * n)).for_each(|w, wt| {
        let feat: Vec<f64> = pairs.iter().map(|&(i, j)| if i == j { w[i] * w[i] } else { 2.0 * w[i] * w[j] }).collect();
        let target = s(w).powf(1.0 / d);
        for a in 0..m {
            atb[a] += wt * feat[a] * target;
            for b in 0..m {
                ata[(a, b)] += wt * feat[a] * feat[b];
            }
        }
    });
    let coef = ata.lu().solve(&atb).unwrap_or_else(|| nalgebra::DVector::from_element(m, 0.0));
    let mut q = DMatrix::zeros(n, n);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        q[(i, j)] = coef[k];
        q[(j, i)] = coef[k];
    }
    let eig = SymmetricEigen::new(q);
    let top = eig.eigenvalues.max().max(1e-300);
    let clipped = eig.eigenvalues.map(|l| l.max(1e-3 * top));
    &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
}

/// Width `σ` of the isotropic Gaussian minimizing the variance of the
/// importance weights for `exp(−|η|^{2d})` in `R^n`.
fn optimal_sigma(n: usize, d: f64) -> f64 {
    let two_d = 2.0 * d;
    let rule = GaussRule::new(20);
    let log_second_moment = |sigma: f64| {
        let c = 1.0 / (2.0 * sigma * sigma);
        let mut r_max: f64 = 1.0;
        while 2.0 * r_max.powf(two_d) - c * r_max * r_max < 60.0 {
            r_max *= 1.5;
        }
        let integral = rule.composite(0.0, r_max, 64, |r| r.powi(n as i32 - 1) * (-2.0 * r.powf(two_d) + c * r * r).exp());
        n as f64 * sigma.ln() + integral.ln()
    };
    let lo0 = if two_d <= 2.0 { 0.55 } else { 0.15 };
    let (mut lo, mut hi) = (lo0, 3.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if log_second_moment(a) < log_second_moment(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// `∫_{R^n} exp(−S(ξ))` for `S` homogeneous of degree `2d`, by importance
/// sampling with a Gaussian shaped after `S`.
pub fn exp_symbol_integral_mc(n: usize, d: f64, s: &(dyn Fn(&[f64]) -> f64 + Sync), samples: usize, batches: usize, seed: u64) -> Result<McEstimate> {
    let q = fit_quadratic_form(n, d, s);
    let sigma = optimal_sigma(n, d);
    let cov = spd_power(&q, -1.0)? * (sigma * sigma);
    let proposal = GaussianProposal::new(cov)?;
    Ok(importance_sample(|xi| (-s(xi)).exp(), &proposal, samples, batches, seed))
}

/// `∫_{R^n} exp(−S(ξ)) dξ = (Γ(n/2d)/2d) ∫_{S^{n−1}} S(ω)^{−n/2d} dω`.
fn exp_symbol_integral_sphere(n: usize, d: f64, s: &(dyn Fn(&[f64]) -> f64 + Sync), tol: f64) -> (f64, f64) {
    let k = n as f64 / (2.0 * d);
    let factor = statrs::function::gamma::gamma(k) / (2.0 * d);
    let r = sphere_integrate(n, tol, |w| s(w).powf(-k));
    (factor * r.value, r.error / r.value)
}

/// Disjoint coordinate blocks when every symbol is `Σ_{i∈block} ξ_i²` with
/// unit coefficients and the blocks partition the coordinates.
fn block_structure(polys: &[HomogeneousPoly], n: usize) -> Option<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for p in polys {
        if p.degree != 2 {
            return None;
        }
        let mut size = 0;
        for (c, alpha) in &p.terms {
            let i = alpha.iter().position(|&k| k == 2)?;
            if *c != 1.0 || alpha.iter().sum::<u32>() != 2 || seen[i] {
                return None;
            }
            seen[i] = true;
            size += 1;
        }
        sizes.push(size);
    }
    seen.iter().all(|&s| s).then_some(sizes)
}

/// `Π_j (2π)^{−m_j} ∫_{R^{m_j}} exp(−|η|^{2d}) dη` for symbols `(2π)^d|ξ_{B_j}|^d`
/// on disjoint blocks of sizes `m_j`.
pub fn block_closed_form(blocks: &[usize], d: f64) -> f64 {
    blocks
        .iter()
        .map(|&m| (2.0 * PI).powi(-(m as i32)) * radial_exp_integral(m, 2.0 * d))
        .product()
}

fn p2_constant(symbol: &SymbolSpec, domain: &SearchDomain, opts: P2Options, formula: &str) -> Result<SharpConstantReport> {
    let n = symbol.dim_n;
    let d = symbol.order_d;
    if n % 2 != 0 || (d - n as f64 / 2.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("the p = 2 route needs n even and d = n/2, got n={n}, d={d}")));
    }
    if matches!(symbol.family, SymbolFamily::ExplicitSphereProfile(_)) {
        return Err(Error::Unsupported("explicit profiles go through potential_constant_from_profile".into()));
    }
    let probes: Vec<Vec<f64>> = {
        let mut v = Vec::new();
        SphereRule::new(n, 6).for_each(|w, _| v.push(w.to_vec()));
        v
    };
    for x in domain.grid(3) {
        symbol.check_symbol(&x, &probes)?;
    }
    let x_dependent = !matches!(&symbol.family, SymbolFamily::RieszPower)
        && !(matches!(&symbol.family, SymbolFamily::VectorPolySymbols { scale: None, .. }))
        && domain.grid(2).len() > 1;
    let x_star = if x_dependent {
        let coarse = SphereRule::new(n, coarse_nodes(n));
        maximize(
            |x| coarse.integrate(|w| 1.0 / symbol.sum_sq(x, w).unwrap_or(f64::NAN)),
            domain,
            opts.search,
        )?
        .x
    } else {
        domain_center(domain)
    };
    let s = |xi: &[f64]| symbol.sum_sq(&x_star, xi).unwrap_or(f64::NAN);
    let mc = exp_symbol_integral_mc(n, d, &s, opts.samples, opts.batches, opts.seed)?;
    let (sph, sph_err) = exp_symbol_integral_sphere(n, d, &s, opts.sphere_tol);
    let mut report = SharpConstantReport::new(mc.value, 2.0, 1.0, Method::MonteCarlo, formula);
    report.error_estimate = mc.relative_error();
    report.cross_checks.push(RouteValue { method: Method::SphereQuadrature, a_value: sph, error_estimate: sph_err });
    let mut agree = (mc.value - sph).abs() <= 4.0 * mc.std_error + sph_err * sph;
    if let SymbolFamily::VectorPolySymbols { polys, scale: None } = &symbol.family {
        if let Some(blocks) = block_structure(polys, n) {
            let exact = block_closed_form(&blocks, d);
            report.cross_checks.push(RouteValue { method: Method::ClosedForm, a_value: exact, error_estimate: 0.0 });
            agree &= (exact - sph).abs() <= 1e-8 * exact + sph_err * sph;
        }
    }
    report.routes_agree = Some(agree);
    report.extremizer = x_dependent.then_some(x_star);
    report.unverified.push(INJECTIVITY.into());
    Ok(report)
}

/// Scalar `p = 2` case (`d = n/2`): `A = sup_x ∫_{R^n} exp(−|p⁰(x,ξ)|²) dξ`,
/// by Monte Carlo and independently by `(1/n) ∫_{S^{n−1}} |p⁰|^{−2}`.
pub fn elliptic_p2_constant(symbol: &SymbolSpec, domain: &SearchDomain, opts: P2Options) -> Result<SharpConstantReport> {
    let scalar = match &symbol.family {
        SymbolFamily::RieszPower | SymbolFamily::SpdQuadraticForm(_) => true,
        SymbolFamily::VectorPolySymbols { polys, .. } => polys.len() == 1,
        _ => false,
    };
    if !scalar {
        return Err(Error::Unsupported("elliptic_p2_constant needs a scalar symbol".into()));
    }
    p2_constant(symbol, domain, opts, "A = sup_x int_{R^n} exp(-|p0(x,xi)|^2) dxi = (1/n) int_{S^{n-1}} |p0(x,w)|^-2 dw; constant 1/A")
}

/// Vector `p = 2` case: `A = sup_x ∫ exp(−Σ_j |p_j⁰(x,ξ)|²) dξ`.
pub fn vector_p2_constant(symbol: &SymbolSpec, domain: &SearchDomain, opts: P2Options) -> Result<SharpConstantReport> {
    p2_constant(symbol, domain, opts, "A = sup_x int_{R^n} exp(-sum_j |p_j0(x,xi)|^2) dxi; constant 1/A")
}

fn check_field_on_grid(field: &MatrixField, n: usize, domain: &SearchDomain, check: impl Fn(&DMatrix<f64>) -> Result<()>) -> Result<()> {
    let grid = domain.grid(5);
    if grid.is_empty() {
        return Err(Error::Parameter("empty search grid".into()));
    }
    for x in grid {
        let a = field(&x);
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::Input(format!("matrix field returned {}x{}, expected {n}x{n}", a.nrows(), a.ncols())));
        }
        check(&a)?;
    }
    Ok(())
}

fn is_symmetric(a: &DMatrix<f64>) -> bool {
    (a - a.transpose()).abs().max() <= 1e-12 * a.abs().max().max(1.0)
}

/// `n (n−2)^{n/(n−2)} ω_{n−1}^{2/(n−2)} inf_x (det A_x)^{1/(n−2)}` for
/// `Σ a_jk(x) ∂_j∂_k`, `n > 2`.
pub fn second_order_constant(n: usize, field: MatrixField, domain: &SearchDomain, opts: SearchOptions) -> Result<SharpConstantReport> {
    if n <= 2 {
        return Err(Error::Domain(format!("second-order constant needs n > 2, got {n}")));
    }
    check_field_on_grid(&field, n, domain, |a| {
        if is_symmetric(a) && a.clone().cholesky().is_some() {
            Ok(())
        } else {
            Err(Error::Input("A_x is not symmetric positive definite".into()))
        }
    })?;
    let f2 = field.clone();
    let ext = minimize(move |x| f2(x).determinant(), domain, opts)?;
    let nf = n as f64;
    let omega = sphere_area(n);
    let constant = nf * (nf - 2.0).powf(nf / (nf - 2.0)) * omega.powf(2.0 / (nf - 2.0)) * ext.value.powf(1.0 / (nf - 2.0));
    let mut r = SharpConstantReport::new(
        1.0 / constant,
        nf / (nf - 2.0),
        1.0,
        Method::ClosedForm,
        "n (n-2)^(n/(n-2)) omega_{n-1}^(2/(n-2)) inf_x det(A_x)^(1/(n-2))",
    );
    r.extremizer = Some(ext.x);
    r.unverified.push(INJECTIVITY.into());
    Ok(r)
}

/// `n ω_{n−1}^{1/(n−1)} inf_x |det A_x|^{1/(n−1)}` for the vector operator
/// `(Σ_k a_jk(x) ∂_k)_j`, `n > 1`.
pub fn first_order_vector_constant(n: usize, field: MatrixField, domain: &SearchDomain, opts: SearchOptions) -> Result<SharpConstantReport> {
    if n <= 1 {
        return Err(Error::Domain(format!("first-order constant needs n > 1, got {n}")));
    }
    check_field_on_grid(&field, n, domain, |a| {
        if a.determinant().abs() > 1e-12 {
            Ok(())
        } else {
            Err(Error::Input("A_x is singular".into()))
        }
    })?;
    let f2 = field.clone();
    let ext = minimize(move |x| f2(x).determinant().abs(), domain, opts)?;
    let nf = n as f64;
    let constant = nf * sphere_area(n).powf(1.0 / (nf - 1.0)) * ext.value.powf(1.0 / (nf - 1.0));
    let mut r = SharpConstantReport::new(
        1.0 / constant,
        nf / (nf - 1.0),
        1.0,
        Method::ClosedForm,
        "n omega_{n-1}^(1/(n-1)) inf_x |det A_x|^(1/(n-1))",
    );
    r.extremizer = Some(ext.x);
    r.unverified.push(INJECTIVITY.into());
    Ok(r)
}

pub type PairFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type PairSet = Arc<dyn Fn(&[f64], &[f64]) -> bool + Send + Sync>;
pub type PointSet = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// `Σ_j g_j(x, x + a_j)`-type kernels: data for the weighted-sum constant.
#[derive(Clone)]
pub struct WeightedSum {
    pub n: usize,
    pub d: f64,
    /// `(g_j, a_j)`.
    pub terms: Vec<(PairFn, Vec<f64>)>,
    /// Search region `Ω′` (closure).
    pub omega_prime: SearchDomain,
    /// Open set `Ω`.
    pub omega: PointSet,
    /// Membership in the closure of `U`.
    pub u_closure: PairSet,
}

impl WeightedSum {
    fn shifted(x: &[f64], a: &[f64]) -> Vec<f64> {
        x.iter().zip(a).map(|(u, v)| u + v).collect()
    }

    /// `Σ_{j: (x, x+a_j) ∈ Ū} |g_j(x, x+a_j)|^{p′}`.
    pub fn sum_at(&self, x: &[f64]) -> f64 {
        let p_prime = self.n as f64 / (self.n as f64 - self.d);
        self.terms
            .iter()
            .map(|(g, a)| {
                let y = Self::shifted(x, a);
                if (self.u_closure)(x, &y) {
                    g(x, &y).abs().powf(p_prime)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// `x` lies in `Ω* = int Ω′ ∩ ⋂_j (Ω − a_j)`.
    pub fn in_omega_star(&self, x: &[f64]) -> bool {
        let d = &self.omega_prime;
        let interior = x.iter().enumerate().all(|(i, &v)| {
            let w = (d.hi[i] - d.lo[i]).abs() * 1e-9;
            d.hi[i] <= d.lo[i] || (v > d.lo[i] + w && v < d.hi[i] - w)
        }) && d.contains(x);
        interior && self.terms.iter().all(|(_, a)| (self.omega)(&Self::shifted(x, a)))
    }
}

/// `M(g) = sup_x Σ_j |g_j(x, x+a_j)|^{p′}` over `Ω′` with admissibility;
/// constant `n/(ω_{n−1} M(g))`; `sharp` records whether the supremum is
/// attained on `Ω*`.
pub fn weighted_sum_constant(spec: &WeightedSum, opts: SearchOptions) -> Result<SharpConstantReport> {
    let n = spec.n;
    if !(spec.d > 0.0 && spec.d < n as f64) {
        return Err(Error::Domain(format!("need 0 < d < n, got n={n}, d={}", spec.d)));
    }
    for i in 0..spec.terms.len() {
        for j in 0..i {
            if spec.terms[i].1 == spec.terms[j].1 {
                return Err(Error::Parameter("shift vectors must be pairwise distinct".into()));
            }
        }
    }
    let ext = maximize(|x| spec.sum_at(x), &spec.omega_prime, opts)?;
    let m = ext.value;
    if !(m > 0.0) {
        return Err(Error::Degenerate("M(g) = 0".into()));
    }
    let tol = 1e-9 * m;
    let attained = spec.in_omega_star(&ext.x)
        || spec
            .omega_prime
            .grid(opts.per_axis)
            .iter()
            .any(|x| spec.in_omega_star(x) && spec.sum_at(x) >= m - tol);
    let nf = n as f64;
    let a = sphere_area(n) * m / nf;
    let mut r = SharpConstantReport::new(a, nf / (nf - spec.d), 1.0, Method::ClosedForm, "n / (omega_{n-1} M(g)), M(g) = sup_x sum_j |g_j(x, x+a_j)|^{p'}");
    r.extremizer = Some(ext.x);
    r.sharp = Some(attained);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn trace_constants() {
        assert!(rel(adams_trace_constant(2, 1, 2.0).unwrap().constant_value, 4.0 * PI) < 1e-13);
        assert!(rel(adams_trace_constant(4, 2, 4.0).unwrap().constant_value, 32.0 * PI * PI) < 1e-13);
        let full = adams_trace_constant(5, 3, 5.0).unwrap().constant_value;
        let half = adams_trace_constant(5, 3, 2.5).unwrap().constant_value;
        assert!(rel(half, 0.5 * full) < 1e-15);
        // Moser n ω^{1/(n−1)} for d = 1
        for n in 2..7 {
            let c = adams_trace_constant(n, 1, n as f64).unwrap().constant_value;
            assert!(rel(c, n as f64 * sphere_area(n).powf(1.0 / (n as f64 - 1.0))) < 1e-12, "n={n}");
        }
        assert!(adams_trace_constant(4, 4, 4.0).is_err());
        assert!(adams_trace_constant(4, 2, 5.0).is_err());
    }

    #[test]
    fn report_invariant() {
        let r = adams_trace_constant(4, 2, 4.0).unwrap();
        assert!((r.constant_value * r.a_value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_profile_recovers_riesz() {
        let (n, d) = (3usize, 2.0);
        let c = riesz_c_d(n, d).unwrap();
        let prof = SphereProfile::constant_in_x(n, move |_| c);
        let r = potential_constant_from_profile(&prof, d, &SearchDomain::point(vec![0.0; 3]), SearchOptions::default(), 1e-10).unwrap();
        let expect = adams_trace_constant(n, 2, 3.0).unwrap();
        assert!(rel(r.constant_value, expect.constant_value) < 1e-10);
    }

    #[test]
    fn cosine_profile_on_circle() {
        let prof = SphereProfile::constant_in_x(2, |w| 1.0 + 0.5 * w[0]);
        let r = potential_constant_from_profile(&prof, 1.0, &SearchDomain::point(vec![0.0, 0.0]), SearchOptions::default(), 1e-12).unwrap();
        assert!(rel(r.a_value, 9.0 * PI / 8.0) < 1e-12);
    }

    #[test]
    fn second_order_examples() {
        let d = SearchDomain::point(vec![0.0; 4]);
        let id: MatrixField = Arc::new(|_| DMatrix::identity(4, 4));
        let r = second_order_constant(4, id, &d, SearchOptions::default()).unwrap();
        assert!(rel(r.constant_value, 32.0 * PI * PI) < 1e-13);
        let two: MatrixField = Arc::new(|_| DMatrix::identity(4, 4) * 2.0);
        assert!(rel(second_order_constant(4, two, &d, SearchOptions::default()).unwrap().constant_value, 128.0 * PI * PI) < 1e-13);
        let ball = SearchDomain::ball(vec![0.0; 4], 1.0);
        let var: MatrixField = Arc::new(|x| {
            let mut m = DMatrix::identity(4, 4);
            m[(0, 0)] = 1.0 + x[0] * x[0];
            m
        });
        let r = second_order_constant(4, var, &ball, SearchOptions { per_axis: 5, iterations: 200 }).unwrap();
        assert!(rel(r.constant_value, 32.0 * PI * PI) < 1e-8, "{}", r.constant_value);
        let bad: MatrixField = Arc::new(|_| -DMatrix::identity(4, 4));
        assert!(matches!(second_order_constant(4, bad, &d, SearchOptions::default()), Err(Error::Input(_))));
    }

    #[test]
    fn first_order_examples() {
        let d = SearchDomain::point(vec![0.0; 2]);
        let id: MatrixField = Arc::new(|_| DMatrix::identity(2, 2));
        assert!(rel(first_order_vector_constant(2, id, &d, SearchOptions::default()).unwrap().constant_value, 4.0 * PI) < 1e-13);
        let diag: MatrixField = Arc::new(|_| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0])));
        assert!(rel(first_order_vector_constant(2, diag, &d, SearchOptions::default()).unwrap().constant_value, 8.0 * PI) < 1e-13);
        let sing: MatrixField = Arc::new(|_| DMatrix::zeros(2, 2));
        assert!(first_order_vector_constant(2, sing, &d, SearchOptions::default()).is_err());
    }

    #[test]
    fn gradient_coefficient_matches_limit() {
        // c_{d+1}(n−d−1) where both factors are regular
        for (n, d) in [(5usize, 1usize), (6, 3), (7, 3)] {
            let direct = riesz_c_d(n, d as f64 + 1.0).unwrap() * (n - d - 1) as f64;
            assert!(rel(gradient_riesz_coefficient(n, d), direct) < 1e-13);
        }
    }

    #[test]
    fn block_closed_forms() {
        let b1 = 1.0 / block_closed_form(&[1, 1, 1, 1], 2.0);
        let b2 = 1.0 / block_closed_form(&[2, 2], 2.0);
        let lap = 1.0 / block_closed_form(&[4], 2.0);
        let g54 = statrs::function::gamma::gamma(1.25);
        assert!(rel(b1, PI.powi(4) / g54.powi(4)) < 1e-13);
        assert!(rel(b2, 64.0 * PI) < 1e-13);
        assert!(rel(lap, 32.0 * PI * PI) < 1e-13);
    }
}
