use rayon::prelude::*;
use serde::Serialize;

use super::kernel_spec::KernelSpec;
use crate::error::{Error, Result};
use crate::quadrature::{linear_fit, SphereRule};

/// Bounded region `Ω` for level-set counting.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Cube { lo: Vec<f64>, hi: Vec<f64> },
}

impl RegionSpec {
    fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Cube { lo, .. } => lo.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::Ball { center, radius } => x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < radius * radius,
            Self::Cube { lo, hi } => x.iter().enumerate().all(|(i, &v)| v > lo[i] && v < hi[i]),
        }
    }

    /// Exit distance along the ray `x + ρω` for `x` inside the region.
    fn exit(&self, x: &[f64], w: &[f64]) -> f64 {
        match self {
            Self::Ball { center, radius } => {
                let dx: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let b: f64 = dx.iter().zip(w).map(|(a, b)| a * b).sum();
                let c: f64 = dx.iter().map(|a| a * a).sum::<f64>() - radius * radius;
                -b + (b * b - c).max(0.0).sqrt()
            }
            Self::Cube { lo, hi } => (0..x.len())
                .filter_map(|i| {
                    if w[i] > 0.0 {
                        Some((hi[i] - x[i]) / w[i])
                    } else if w[i] < 0.0 {
                        Some((lo[i] - x[i]) / w[i])
                    } else {
                        None
                    }
                })
                .fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AsymptoticsOptions {
    /// Sphere nodes per angle for the ray directions.
    pub directions: usize,
    /// Log-spaced radial cells per ray.
    pub radial_cells: usize,
    /// Largest tolerated log-log fit residual before the regime counts as
    /// non-asymptotic.
    pub max_residual: f64,
}

impl Default for AsymptoticsOptions {
    fn default() -> Self {
        Self { directions: 64, radial_cells: 400, max_residual: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    /// `sup_x lim s^{p′} |{y: |K(x,y)| > s}|`, estimated at the large-`s` end.
    pub a_hat: f64,
    /// `−slope` of the free log-log fit; `None` if every level set is empty.
    pub exponent_hat: Option<f64>,
    /// Same as `a_hat` for the columns `|{x: |K(x,y)| > s}|`.
    pub upper_b: f64,
    /// `(1/n) sup_x ∫ |g(x,ω)|^{p′} dω` from the leading profile.
    pub a_expected: Option<f64>,
    pub fit_residual: f64,
    /// `(s, max over probes of the row measure)`.
    pub row_measures: Vec<(f64, f64)>,
}

/// `|{y ∈ Ω: |k(y)| > s}|` by polar counting around `x`: each ray is split
/// into log-spaced cells, sign changes of `|k| − s` are bisected, and the
/// measure of each radial interval is exact.
pub fn level_set_measure(k: &(dyn Fn(&[f64]) -> f64 + Sync), x: &[f64], region: &RegionSpec, s: f64, opts: AsymptoticsOptions) -> f64 {
    let n = x.len();
    let nf = n as f64;
    let rule = SphereRule::new(n, opts.directions);
    let mut rays: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rule.len());
    rule.for_each(|w, wt| rays.push((w.to_vec(), wt)));
    rays.par_iter()
        .map(|(w, wt)| {
            let r_max = region.exit(x, w);
            if !(r_max > 0.0 && r_max.is_finite()) {
                return 0.0;
            }
            let point = |rho: f64| -> Vec<f64> { x.iter().zip(w).map(|(a, b)| a + rho * b).collect() };
            let above = |rho: f64| k(&point(rho)).abs() > s;
            let r_min = r_max * 1e-12;
            let cells = opts.radial_cells;
            let radius = |i: usize| if i == cells { r_max } else { r_min * (r_max / r_min).powf(i as f64 / cells as f64) };
            let mut total = 0.0;
            let mut start = if above(r_min) { Some(0.0) } else { None };
            let mut prev_r = r_min;
            let mut prev_above = start.is_some();
            for i in 1..=cells {
                // stay strictly inside at the far end
                let r = if i == cells { r_max * (1.0 - 1e-12) } else { radius(i) };
                let now = above(r);
                if now != prev_above {
                    let (mut lo, mut hi) = (prev_r, r);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if above(mid) == prev_above {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let cross = 0.5 * (lo + hi);
                    if now {
                        start = Some(cross);
                    } else if let Some(a) = start.take() {
                        total += (cross.powf(nf) - a.powf(nf)) / nf;
                    }
                }
                prev_r = r;
                prev_above = now;
            }
            if let Some(a) = start {
                total += (r_max.powf(nf) - a.powf(nf)) / nf;
            }
            wt * total
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

/// Level-set asymptotics `|{y: |K(x,y)| > s}| ≈ A s^{−p′}` at each probe and
/// the analogous column bound, fitted over `s_grid`.
pub fn distribution_asymptotics(
    kernel: &KernelSpec,
    s_grid: &[f64],
    probe_points: &[Vec<f64>],
    region: &RegionSpec,
    opts: AsymptoticsOptions,
) -> Result<AsymptoticsReport> {
    let n = kernel.dim_n;
    if s_grid.len() < 2 || s_grid.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Input("s_grid needs at least two positive finite levels".into()));
    }
    if probe_points.is_empty() || region.dim() != n {
        return Err(Error::Input("probe points and region must be given in dimension n".into()));
    }
    if let Some(p) = probe_points.iter().find(|p| p.len() != n || !region.contains(p)) {
        return Err(Error::Input(format!("probe point {p:?} is not inside the region")));
    }
    let p_prime = kernel.p_prime();
    let mut grid = s_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let upper_half = &grid[grid.len() / 2..];

    let coefficient = |col: bool| -> (f64, Vec<Vec<f64>>) {
        let mut per_probe = Vec::new();
        let mut best: f64 = 0.0;
        for x in probe_points {
            let k = |y: &[f64]| if col { kernel.eval(y, x) } else { kernel.eval(x, y) };
            let m: Vec<f64> = grid.iter().map(|&s| level_set_measure(&k, x, region, s, opts)).collect();
            let scaled: Vec<f64> = upper_half.iter().zip(&m[grid.len() / 2..]).map(|(s, m)| m * s.powf(p_prime)).collect();
            best = best.max(median(scaled));
            per_probe.push(m);
        }
        (best, per_probe)
    };
    let (a_hat, rows) = coefficient(false);
    let (upper_b, _) = coefficient(true);

    let row_measures: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, rows.iter().map(|m| m[i]).fold(0.0, f64::max)))
        .collect();
    let positive: Vec<(f64, f64)> = row_measures.iter().filter(|(_, m)| *m > 0.0).map(|&(s, m)| (s.ln(), m.ln())).collect();
    let (exponent_hat, fit_residual) = if positive.is_empty() {
        (None, 0.0)
    } else if positive.len() < 2 {
        return Err(Error::Inconclusive("fewer than two levels with non-empty level sets".into()));
    } else {
        let (xs, ys): (Vec<f64>, Vec<f64>) = positive.into_iter().unzip();
        let (_, slope, res) = linear_fit(&xs, &ys);
        (Some(-slope), res)
    };
    if fit_residual > opts.max_residual {
        return Err(Error::Inconclusive(format!(
            "log-log fit residual {fit_residual:.3e} exceeds {:.3e}; raise the s levels into the asymptotic regime",
            opts.max_residual
        )));
    }
    let a_expected = kernel.has_profile().then(|| {
        let rule = SphereRule::new(n, 256.min(opts.directions * 4));
        probe_points
            .iter()
            .map(|x| rule.integrate(|w| kernel.profile(x, w).unwrap_or(0.0).abs().powf(p_prime)) / n as f64)
            .fold(0.0, f64::max)
    });
    Ok(AsymptoticsReport { a_hat, exponent_hat, upper_b, a_expected, fit_residual, row_measures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::geometric_grid;
    use std::f64::consts::PI;

    #[test]
    fn riesz_disc() {
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let region = RegionSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let r = distribution_asymptotics(&k, &geometric_grid(10.0, 1e4, 12), &[vec![0.0, 0.0], vec![0.3, 0.1]], &region, AsymptoticsOptions::default()).unwrap();
        assert!(((r.a_hat - PI) / PI).abs() < 1e-6, "{r:?}");
        assert!((r.exponent_hat.unwrap() - 2.0).abs() < 1e-6);
        assert!(((r.upper_b - PI) / PI).abs() < 1e-6);
    }

    #[test]
    fn cosine_profile() {
        let k = KernelSpec::with_profile(2, 1.0, |_, w| 1.0 + 0.5 * w[0]).unwrap();
        let region = RegionSpec::Cube { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] };
        let r = distribution_asymptotics(&k, &geometric_grid(50.0, 1e4, 8), &[vec![0.0, 0.0]], &region, AsymptoticsOptions::default()).unwrap();
        let expect = 9.0 * PI / 8.0;
        assert!(((r.a_hat - expect) / expect).abs() < 0.02, "{r:?}");
        assert!(((r.a_expected.unwrap() - expect) / expect).abs() < 1e-6);
    }

    #[test]
    fn zero_kernel_is_empty() {
        let k = KernelSpec::with_profile(2, 1.0, |_, _| 0.0).unwrap();
        let region = RegionSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let r = distribution_asymptotics(&k, &[1.0, 10.0], &[vec![0.0, 0.0]], &region, AsymptoticsOptions::default()).unwrap();
        assert_eq!(r.a_hat, 0.0);
        assert!(r.exponent_hat.is_none());
    }

    #[test]
    fn small_levels_are_inconclusive() {
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let region = RegionSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        // below s = 1 the level set saturates at |Ω|
        let r = distribution_asymptotics(&k, &geometric_grid(1e-3, 1e3, 12), &[vec![0.0, 0.0]], &region, AsymptoticsOptions::default());
        assert!(matches!(r, Err(Error::Inconclusive(_))));
    }
}
