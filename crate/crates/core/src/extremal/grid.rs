use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{FiniteMeasureSpace, KernelMatrix};
use crate::operator::{IntegralOperator, Operator};
use crate::symbol::RadialKernel;

/// Cells on the interval `(c − R, c + R)`, refined geometrically toward `c`:
/// every dyadic shell `R·[2^{-k}, 2^{-k+1})` is split into `per_shell`
/// geometric sub-cells, down to `R·2^{-finest}`, plus one central cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    center: f64,
    edges: Vec<f64>,
}

impl Grid1D {
    pub fn dyadic(center: f64, radius: f64, finest: u32, per_shell: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) || per_shell == 0 || finest == 0 {
            return Err(Error::Parameter("need radius > 0, finest >= 1, per_shell >= 1".into()));
        }
        let mut right = Vec::with_capacity(finest as usize * per_shell + 1);
        for k in (1..=finest).rev() {
            let lo = radius * 2f64.powi(-(k as i32));
            for j in 0..per_shell {
                right.push(lo * 2f64.powf(j as f64 / per_shell as f64));
            }
        }
        right.push(radius);
        let mut edges: Vec<f64> = right.iter().rev().map(|r| center - r).collect();
        edges.extend(right.iter().map(|r| center + r));
        Ok(Self { center, edges })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Lebesgue measure with nodes at the cell midpoints.
    pub fn lebesgue(&self) -> Result<FiniteMeasureSpace> {
        FiniteMeasureSpace::grid(self.midpoints().into_iter().map(|x| vec![x]).collect(), self.widths())
    }

    /// `|x − c|^{λ−1} dx`, cell masses exact.
    pub fn power_measure(&self, lambda: f64) -> Result<FiniteMeasureSpace> {
        if !(lambda > 0.0) {
            return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
        }
        let c = self.center;
        let prim = |x: f64| (x - c).signum() * (x - c).abs().powf(lambda) / lambda;
        let w = self.edges.windows(2).map(|e| prim(e[1]) - prim(e[0])).collect();
        FiniteMeasureSpace::grid(self.midpoints().into_iter().map(|x| vec![x]).collect(), w)
    }

    /// Index of the cell containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.edges[0] || x >= *self.edges.last().unwrap() {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= x) - 1)
    }
}

/// `∫_a^b k(|x − y|) dy`, exact for the radial kernel family.
pub fn cell_integral(kernel: &RadialKernel, x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        kernel.integral(a - x, b - x)
    } else if x >= b {
        kernel.integral(x - b, x - a)
    } else {
        kernel.integral(0.0, x - a) + kernel.integral(0.0, b - x)
    }
}

/// `Tf(x_i) = Σ_j f_j ∫_{cell j} k(|x_i − y|) dy` on a [`Grid1D`]: `f` is
/// constant on cells and the kernel is integrated exactly over each cell.
/// Entries are computed on the fly.
#[derive(Debug, Clone)]
pub struct RadialOperator1D {
    grid: Grid1D,
    kernel: RadialKernel,
    domain: FiniteMeasureSpace,
    codomain: FiniteMeasureSpace,
}

impl RadialOperator1D {
    /// Lebesgue measure on the domain; `codomain` must live on the same cells.
    pub fn new(grid: Grid1D, kernel: RadialKernel, codomain: FiniteMeasureSpace) -> Result<Self> {
        if codomain.len() != grid.len() {
            return Err(Error::Input("codomain must have one point per grid cell".into()));
        }
        if !(kernel.exponent() < 1.0) {
            return Err(Error::Domain("kernel exponent must be < 1 to be locally integrable in 1-D".into()));
        }
        let domain = grid.lebesgue()?;
        Ok(Self { grid, kernel, domain, codomain })
    }

    pub fn lebesgue(grid: Grid1D, kernel: RadialKernel) -> Result<Self> {
        let nu = grid.lebesgue()?;
        Self::new(grid, kernel, nu)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn kernel(&self) -> RadialKernel {
        self.kernel
    }

    /// The same operator with a different measure on the values.
    pub fn with_codomain(&self, codomain: FiniteMeasureSpace) -> Result<Self> {
        Self::new(self.grid.clone(), self.kernel, codomain)
    }
}

impl Operator for RadialOperator1D {
    fn domain(&self) -> &FiniteMeasureSpace {
        &self.domain
    }

    fn codomain(&self) -> &FiniteMeasureSpace {
        &self.codomain
    }

    fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.grid.len() {
            return Err(Error::Input(format!("f has {} values, grid has {} cells", f.len(), self.grid.len())));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("f must be finite".into()));
        }
        let edges = self.grid.edges();
        let support: Vec<usize> = (0..f.len()).filter(|&j| f[j] != 0.0).collect();
        Ok(self
            .grid
            .midpoints()
            .par_iter()
            .map(|&x| support.iter().map(|&j| f[j] * cell_integral(&self.kernel, x, edges[j], edges[j + 1])).sum())
            .collect())
    }
}

/// Polar cells of the disc `|x| < R` in `R^2`: a central disc of radius
/// `R·2^{-finest}`, then `per_shell` geometric rings per dyadic shell, each cut
/// into `sectors` equal sectors. Nodes sit at the area-median radius
/// `√((r0² + r1²)/2)` on the bisecting ray.
pub fn disc_space(radius: f64, finest: u32, per_shell: usize, sectors: usize) -> Result<FiniteMeasureSpace> {
    if !(radius > 0.0) || finest == 0 || per_shell == 0 || sectors == 0 {
        return Err(Error::Parameter("need radius > 0 and positive level/ring/sector counts".into()));
    }
    let r_min = radius * 2f64.powi(-(finest as i32));
    let dth = 2.0 * std::f64::consts::PI / sectors as f64;
    let mut coords = vec![vec![0.0, 0.0]];
    let mut weights = vec![std::f64::consts::PI * r_min * r_min];
    let rings = finest as usize * per_shell;
    for i in 0..rings {
        let r0 = r_min * 2f64.powf(i as f64 / per_shell as f64);
        let r1 = r_min * 2f64.powf((i + 1) as f64 / per_shell as f64);
        let area = 0.5 * (r1 * r1 - r0 * r0) * dth;
        let rc = (0.5 * (r0 * r0 + r1 * r1)).sqrt();
        for j in 0..sectors {
            let th = (j as f64 + 0.5) * dth;
            coords.push(vec![rc * th.cos(), rc * th.sin()]);
            weights.push(area);
        }
    }
    FiniteMeasureSpace::grid(coords, weights)
}

/// Dense `|x − y|^{-a}` operator on a planar quadrature space: midpoint rule
/// off the diagonal, the average over the equal-area disc on it.
pub fn planar_riesz_operator(space: &FiniteMeasureSpace, a: f64) -> Result<IntegralOperator> {
    let coords = space.coords().ok_or_else(|| Error::Input("space needs coordinates".into()))?;
    if coords[0].len() != 2 || !(a > 0.0 && a < 2.0) {
        return Err(Error::Domain("planar operator needs 2-D points and 0 < a < 2".into()));
    }
    let w = space.weights();
    let kernel = KernelMatrix::from_fn(space.len(), space.len(), |i, j| {
        if i == j {
            let r = (w[i] / std::f64::consts::PI).sqrt();
            2.0 * r.powf(-a) / (2.0 - a)
        } else {
            let (p, q) = (&coords[i], &coords[j]);
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt().powf(-a)
        }
    })?;
    IntegralOperator::new(kernel, space.clone(), space.clone())
}
