use rayon::prelude::*;

use super::profile::RearrangementProfile;
use super::space::FiniteMeasureSpace;
use super::{rearrange, Result};
use crate::error::Error;

/// Dense kernel `k(x_i, y_j)` with rows indexed by the codomain `N` and
/// columns by the domain `M`. `+∞` entries mark singular atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl KernelMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Input(format!("kernel data has {} entries, expected {rows}x{cols}", data.len())));
        }
        if let Some(i) = data.iter().position(|v| v.is_nan()) {
            return Err(Error::Input(format!("kernel entry ({}, {}) is NaN", i / cols, i % cols)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Input("ragged kernel rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Result<Self> {
        let data: Vec<f64> = (0..rows * cols).into_par_iter().map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, data)
    }

    pub fn constant(rows: usize, cols: usize, c: f64) -> Result<Self> {
        Self::new(rows, cols, vec![c; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

/// Pointwise supremum of step profiles, exact at the union of breakpoints.
pub(crate) fn sup_profiles(profiles: &[RearrangementProfile]) -> RearrangementProfile {
    let mut cuts: Vec<f64> = profiles.iter().flat_map(|p| p.breakpoints().iter().copied()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let chunk = profiles.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
    let maxima = profiles
        .par_chunks(chunk)
        .map(|group| {
            let mut acc = vec![0.0f64; cuts.len()];
            for p in group {
                let (bps, vals) = (p.breakpoints(), p.values());
                let mut k = 0;
                for j in 0..cuts.len() {
                    // value on [cuts[j-1], cuts[j]) is the value at cuts[j-1]
                    let left = if j == 0 { 0.0 } else { cuts[j - 1] };
                    while k < bps.len() && bps[k] <= left {
                        k += 1;
                    }
                    let v = if k < vals.len() { vals[k] } else { 0.0 };
                    if v > acc[j] {
                        acc[j] = v;
                    }
                }
            }
            acc
        })
        .reduce(
            || vec![0.0; cuts.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );
    let mut bps = Vec::with_capacity(cuts.len());
    let mut vals: Vec<f64> = Vec::with_capacity(cuts.len());
    for (c, v) in cuts.into_iter().zip(maxima) {
        if vals.last() == Some(&v) {
            *bps.last_mut().unwrap() = c;
        } else {
            bps.push(c);
            vals.push(v);
        }
    }
    RearrangementProfile::new(bps, vals).expect("sup of nonincreasing profiles is nonincreasing")
}

/// `k1*(t) = sup_x k*(x,·)(t)` (rows rearranged with respect to `μ` on `M`)
/// and `k2*(t) = sup_y k*(·,y)(t)` (columns with respect to `ν` on `N`).
pub fn kernel_rearrangements(
    kernel: &KernelMatrix,
    space_n: &FiniteMeasureSpace,
    space_m: &FiniteMeasureSpace,
) -> Result<(RearrangementProfile, RearrangementProfile)> {
    if kernel.rows() != space_n.len() || kernel.cols() != space_m.len() {
        return Err(Error::Input(format!(
            "kernel is {}x{} but spaces have {} and {} points",
            kernel.rows(),
            kernel.cols(),
            space_n.len(),
            space_m.len()
        )));
    }
    let rows: Vec<RearrangementProfile> = (0..kernel.rows())
        .into_par_iter()
        .map(|i| rearrange(kernel.row(i), space_m))
        .collect::<Result<_>>()?;
    let cols: Vec<RearrangementProfile> = (0..kernel.cols())
        .into_par_iter()
        .map(|j| rearrange(&kernel.column(j), space_n))
        .collect::<Result<_>>()?;
    Ok((sup_profiles(&rows), sup_profiles(&cols)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_example() {
        let k = KernelMatrix::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let sp = FiniteMeasureSpace::atomic(vec![1.0, 1.0]).unwrap();
        let (k1, k2) = kernel_rearrangements(&k, &sp, &sp).unwrap();
        // row profiles (4,1) and (3,2): pointwise sup is (4,2)
        assert_eq!(k1.breakpoints(), &[1.0, 2.0]);
        assert_eq!(k1.values(), &[4.0, 2.0]);
        // column profiles (4,2) and (3,1)
        assert_eq!(k2.values(), &[4.0, 2.0]);
    }

    #[test]
    fn constant_kernel() {
        let k = KernelMatrix::constant(3, 2, 1.5).unwrap();
        let n = FiniteMeasureSpace::atomic(vec![0.1, 0.2, 0.3]).unwrap();
        let m = FiniteMeasureSpace::atomic(vec![0.5, 0.25]).unwrap();
        let (k1, k2) = kernel_rearrangements(&k, &n, &m).unwrap();
        assert_eq!(k1.values(), &[1.5]);
        assert!((k1.total_mass() - 0.75).abs() < 1e-15);
        assert_eq!(k2.values(), &[1.5]);
        assert!((k2.total_mass() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn singular_diagonal() {
        let k = KernelMatrix::from_rows(&[vec![f64::INFINITY, 1.0], vec![2.0, f64::INFINITY]]).unwrap();
        let sp = FiniteMeasureSpace::atomic(vec![0.5, 0.5]).unwrap();
        let (k1, _) = kernel_rearrangements(&k, &sp, &sp).unwrap();
        assert_eq!(k1.values(), &[f64::INFINITY, 2.0]);
    }

    #[test]
    fn rejects_nan_and_mismatch() {
        assert!(KernelMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        let k = KernelMatrix::constant(2, 2, 1.0).unwrap();
        let sp = FiniteMeasureSpace::atomic(vec![1.0]).unwrap();
        assert!(kernel_rearrangements(&k, &sp, &sp).is_err());
    }
}
