//! Coarse grid search followed by Nelder–Mead refinement over a box domain,
//! used for every `sup_x` / `inf_x` in the constant formulas.

use std::sync::Arc;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;

use crate::error::{Error, Result};

type Membership = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A search region: a closed box optionally cut down by a membership test.
#[derive(Clone)]
pub struct SearchDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    member: Option<Membership>,
}

impl std::fmt::Debug for SearchDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SearchDomain")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("constrained", &self.member.is_some())
            .finish()
    }
}

impl SearchDomain {
    pub fn point(x: Vec<f64>) -> Self {
        Self { lo: x.clone(), hi: x, member: None }
    }

    pub fn cube(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi, member: None }
    }

    /// Closed ball of radius `r` about `center`.
    pub fn ball(center: Vec<f64>, r: f64) -> Self {
        let lo = center.iter().map(|c| c - r).collect();
        let hi = center.iter().map(|c| c + r).collect();
        let c2 = center.clone();
        Self {
            lo,
            hi,
            member: Some(Arc::new(move |x: &[f64]| {
                x.iter().zip(&c2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r * r * (1.0 + 1e-12)
            })),
        }
    }

    pub fn with_membership(mut self, member: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.member = Some(Arc::new(member));
        self
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let in_box = x
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= *l - 1e-12 && *v <= *h + 1e-12);
        in_box && self.member.as_ref().is_none_or(|m| m(x))
    }

    /// Tensor grid with `per_axis` points per non-degenerate axis, filtered by
    /// membership.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| {
                if h <= l || per_axis <= 1 {
                    vec![0.5 * (l + h)]
                } else {
                    crate::quadrature::linear_grid(l, h, per_axis)
                }
            })
            .collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for p in &out {
                for &v in axis {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
            out = next;
        }
        out.retain(|p| self.contains(p));
        out
    }

    fn spacing(&self, per_axis: usize) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| if per_axis > 1 { (h - l) / (per_axis - 1) as f64 } else { 0.0 })
            .collect()
    }
}

/// Search options; defaults are 17 grid points per axis and 200 Nelder–Mead
/// iterations.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub per_axis: usize,
    pub iterations: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { per_axis: 17, iterations: 200 }
    }
}

/// Location and value of an extremum.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

struct Penalized<'a, F> {
    f: &'a F,
    domain: &'a SearchDomain,
    sign: f64,
}

impl<F> CostFunction for Penalized<'_, F>
where
    F: Fn(&[f64]) -> f64,
{
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        if !self.domain.contains(p) {
            return Ok(f64::INFINITY);
        }
        let v = (self.f)(p);
        Ok(if v.is_finite() { self.sign * v } else { f64::INFINITY })
    }
}

fn search<F>(f: &F, domain: &SearchDomain, opts: SearchOptions, sign: f64) -> Result<Extremum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let grid = domain.grid(opts.per_axis);
    if grid.is_empty() {
        return Err(Error::Parameter("empty search grid".into()));
    }
    let values: Vec<f64> = grid.par_iter().map(|x| sign * f(x)).collect();
    let (best_idx, best) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold((usize::MAX, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    if best_idx == usize::MAX {
        return Err(Error::Input("objective not finite anywhere on the search grid".into()));
    }
    let mut evaluations = grid.len();
    let x0 = grid[best_idx].clone();
    let step = domain.spacing(opts.per_axis);
    let active: Vec<usize> = (0..domain.dim()).filter(|&i| step[i] > 0.0).collect();
    if active.is_empty() || opts.iterations == 0 {
        return Ok(Extremum { x: x0, value: sign * best, evaluations });
    }
    let mut simplex = vec![x0.clone()];
    for &i in &active {
        let mut v = x0.clone();
        let h = 0.5 * step[i];
        v[i] = if v[i] + h <= domain.hi[i] { v[i] + h } else { v[i] - h };
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-14)
        .map_err(|e| Error::Parameter(e.to_string()))?;
    let cost = Penalized { f, domain, sign };
    let res = Executor::new(cost, solver)
        .configure(|s| s.max_iters(opts.iterations))
        .run()
        .map_err(|e| Error::Parameter(e.to_string()))?;
    let state = res.state();
    evaluations += state.get_iter() as usize * 2;
    let refined = state.get_best_param().cloned().unwrap_or_else(|| x0.clone());
    let refined_cost = state.get_best_cost();
    if refined_cost < best {
        Ok(Extremum { x: refined, value: sign * refined_cost, evaluations })
    } else {
        Ok(Extremum { x: x0, value: sign * best, evaluations })
    }
}

/// `sup_{x ∈ domain} f(x)`.
pub fn maximize<F>(f: F, domain: &SearchDomain, opts: SearchOptions) -> Result<Extremum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    search(&f, domain, opts, -1.0)
}

/// `inf_{x ∈ domain} f(x)`.
pub fn minimize<F>(f: F, domain: &SearchDomain, opts: SearchOptions) -> Result<Extremum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    search(&f, domain, opts, 1.0)
}
