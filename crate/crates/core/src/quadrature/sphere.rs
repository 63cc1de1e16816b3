//! Product quadrature on `S^{n-1}`: trapezoid in the azimuth, Gauss–Legendre
//! in each polar angle of hyperspherical coordinates.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::gauss_legendre;

/// A tensor-product rule on `S^{n-1}` with `k` polar nodes per angle and
/// `2k` azimuthal nodes.
#[derive(Debug, Clone)]
pub struct SphereRule {
    n: usize,
    k: usize,
    // per polar level: (cos θ, sin θ, weight·sin^{n-1-level} θ)
    polar: Vec<Vec<(f64, f64, f64)>>,
    azimuth: Vec<(f64, f64)>,
    az_weight: f64,
}

impl SphereRule {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(n >= 1 && k >= 1);
        let az_count = if n == 2 { k } else { 2 * k };
        let azimuth = (0..az_count)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / az_count as f64;
                (phi.cos(), phi.sin())
            })
            .collect();
        let gl = gauss_legendre(k);
        let levels = n.saturating_sub(2);
        let polar = (0..levels)
            .map(|lvl| {
                let power = (n - 2 - lvl) as i32;
                gl.iter()
                    .map(|&(x, w)| {
                        let th = 0.5 * PI * (x + 1.0);
                        let s = th.sin();
                        (th.cos(), s, 0.5 * PI * w * s.powi(power))
                    })
                    .collect()
            })
            .collect();
        Self {
            n,
            k,
            polar,
            azimuth,
            az_weight: 2.0 * PI / az_count as f64,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nodes_per_angle(&self) -> usize {
        self.k
    }

    /// Total number of quadrature points.
    pub fn len(&self) -> usize {
        if self.n == 1 {
            return 2;
        }
        self.azimuth.len() * self.polar.iter().map(Vec::len).product::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `∫_{S^{n-1}} f dω`.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        match self.n {
            1 => f(&[1.0]) + f(&[-1.0]),
            2 => {
                let s: f64 = self.azimuth.iter().map(|&(c, s)| f(&[c, s])).sum();
                s * self.az_weight
            }
            _ => {
                let first = &self.polar[0];
                let partial: Vec<f64> = first
                    .par_iter()
                    .map(|&(c0, s0, w0)| {
                        let mut omega = vec![0.0; self.n];
                        omega[0] = c0;
                        w0 * self.inner(1, s0, &mut omega, &f)
                    })
                    .collect();
                partial.iter().sum::<f64>() * self.az_weight
            }
        }
    }

    fn inner<F: Fn(&[f64]) -> f64>(&self, level: usize, sin_prod: f64, omega: &mut [f64], f: &F) -> f64 {
        if level == self.polar.len() {
            let mut acc = 0.0;
            for &(c, s) in &self.azimuth {
                omega[self.n - 2] = sin_prod * c;
                omega[self.n - 1] = sin_prod * s;
                acc += f(omega);
            }
            return acc;
        }
        let mut acc = 0.0;
        for &(c, s, w) in &self.polar[level] {
            omega[level] = sin_prod * c;
            acc += w * self.inner(level + 1, sin_prod * s, omega, f);
        }
        acc
    }

    /// Visit every node `(ω, weight)` sequentially.
    pub fn for_each(&self, mut visit: impl FnMut(&[f64], f64)) {
        match self.n {
            1 => {
                visit(&[1.0], 1.0);
                visit(&[-1.0], 1.0);
            }
            2 => {
                for &(c, s) in &self.azimuth {
                    visit(&[c, s], self.az_weight);
                }
            }
            _ => {
                let mut omega = vec![0.0; self.n];
                self.visit_level(0, 1.0, 1.0, &mut omega, &mut visit);
            }
        }
    }

    fn visit_level(&self, level: usize, sin_prod: f64, weight: f64, omega: &mut [f64], visit: &mut impl FnMut(&[f64], f64)) {
        if level == self.polar.len() {
            for &(c, s) in &self.azimuth {
                omega[self.n - 2] = sin_prod * c;
                omega[self.n - 1] = sin_prod * s;
                visit(omega, weight * self.az_weight);
            }
            return;
        }
        for &(c, s, w) in &self.polar[level] {
            omega[level] = sin_prod * c;
            self.visit_level(level + 1, sin_prod * s, weight * w, omega, visit);
        }
    }
}

/// Outcome of an adaptive sphere integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereIntegral {
    pub value: f64,
    /// Absolute change between the last two refinements.
    pub error: f64,
    pub nodes_per_angle: usize,
}

fn max_nodes(n: usize) -> usize {
    match n {
        1 | 2 => 1 << 16,
        3 => 1024,
        4 => 256,
        _ => 64,
    }
}

/// Integrate over `S^{n-1}` starting at 64 nodes per angle and doubling until
/// the relative change drops below `rel_tol`.
pub fn sphere_integrate<F>(n: usize, rel_tol: f64, f: F) -> SphereIntegral
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n == 1 {
        let v = SphereRule::new(1, 1).integrate(&f);
        return SphereIntegral { value: v, error: 0.0, nodes_per_angle: 1 };
    }
    let start = if n >= 5 { 16 } else { 64 };
    let mut k = start;
    let mut prev = SphereRule::new(n, k).integrate(&f);
    loop {
        let next_k = 2 * k;
        if next_k > max_nodes(n) {
            return SphereIntegral { value: prev, error: f64::NAN, nodes_per_angle: k };
        }
        let cur = SphereRule::new(n, next_k).integrate(&f);
        let err = (cur - prev).abs();
        k = next_k;
        if err <= rel_tol * cur.abs() || err == 0.0 {
            return SphereIntegral { value: cur, error: err, nodes_per_angle: k };
        }
        prev = cur;
    }
}
