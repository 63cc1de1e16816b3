use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type MatrixField = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type SphereFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type ScaleField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Homogeneous polynomial `Σ a_α ξ^α` with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPoly {
    pub n: usize,
    pub degree: u32,
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl HomogeneousPoly {
    pub fn new(n: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        let degree = terms.first().map_or(0, |t| t.1.iter().sum());
        for (_, alpha) in &terms {
            if alpha.len() != n {
                return Err(Error::Input(format!("multi-index {alpha:?} has wrong length for n = {n}")));
            }
            if alpha.iter().sum::<u32>() != degree {
                return Err(Error::Input("polynomial is not homogeneous".into()));
            }
        }
        Ok(Self { n, degree, terms })
    }

    /// `Σ_{i ∈ idx} ξ_i^2`.
    pub fn sum_of_squares(n: usize, idx: &[usize]) -> Self {
        let terms = idx
            .iter()
            .map(|&i| {
                let mut a = vec![0; n];
                a[i] = 2;
                (1.0, a)
            })
            .collect();
        Self { n, degree: 2, terms }
    }

    /// `(Aξ)_j = Σ_k a_jk ξ_k`.
    pub fn linear(coeffs: &[f64]) -> Self {
        let n = coeffs.len();
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, &c)| {
                let mut a = vec![0; n];
                a[k] = 1;
                (c, a)
            })
            .collect();
        Self { n, degree: 1, terms }
    }

    /// `ξ^T A ξ`.
    pub fn quadratic(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                let c = if i == j { a[(i, i)] } else { a[(i, j)] + a[(j, i)] };
                if c != 0.0 {
                    let mut al = vec![0; n];
                    al[i] += 1;
                    al[j] += 1;
                    terms.push((c, al));
                }
            }
        }
        Self { n, degree: 2, terms }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, alpha)| c * alpha.iter().zip(xi).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }
}

/// Principal-symbol families feeding the sharp-constant formulas.
#[derive(Clone)]
pub enum SymbolFamily {
    /// `(2π|ξ|)^d`, the symbol of `Δ^{d/2}`.
    RieszPower,
    /// `Σ a_jk(x) ∂_j∂_k`: `p⁰ = −4π² ξ^T A_x ξ`.
    SpdQuadraticForm(MatrixField),
    /// Vector `(Σ_k a_jk(x) ∂_k)_j`: `p_j⁰ = 2πi (A_x ξ)_j`.
    FirstOrderMatrix(MatrixField),
    /// Explicit profile `g(x, ω)` of the parametrix kernel.
    ExplicitSphereProfile(SphereFn),
    /// `p_j⁰(x, ξ) = s_j(x) (2πi)^d P_j(ξ)` for homogeneous real polynomials.
    VectorPolySymbols { polys: Vec<HomogeneousPoly>, scale: Option<ScaleField> },
}

/// A symbol family together with its dimension and order.
#[derive(Clone)]
pub struct SymbolSpec {
    pub family: SymbolFamily,
    pub dim_n: usize,
    pub order_d: f64,
}

impl std::fmt::Debug for SymbolSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fam = match &self.family {
            SymbolFamily::RieszPower => "RieszPower",
            SymbolFamily::SpdQuadraticForm(_) => "SpdQuadraticForm",
            SymbolFamily::FirstOrderMatrix(_) => "FirstOrderMatrix",
            SymbolFamily::ExplicitSphereProfile(_) => "ExplicitSphereProfile",
            SymbolFamily::VectorPolySymbols { .. } => "VectorPolySymbols",
        };
        write!(f, "SymbolSpec({fam}, n={}, d={})", self.dim_n, self.order_d)
    }
}

impl SymbolSpec {
    pub fn riesz(n: usize, d: f64) -> Self {
        Self { family: SymbolFamily::RieszPower, dim_n: n, order_d: d }
    }

    pub fn spd_constant(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        Self { family: SymbolFamily::SpdQuadraticForm(Arc::new(move |_| a.clone())), dim_n: n, order_d: 2.0 }
    }

    pub fn spd_field(n: usize, field: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        Self { family: SymbolFamily::SpdQuadraticForm(Arc::new(field)), dim_n: n, order_d: 2.0 }
    }

    pub fn first_order(n: usize, field: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        Self { family: SymbolFamily::FirstOrderMatrix(Arc::new(field)), dim_n: n, order_d: 1.0 }
    }

    pub fn vector_poly(n: usize, polys: Vec<HomogeneousPoly>) -> Result<Self> {
        let d = polys.first().map_or(0, |p| p.degree);
        if polys.is_empty() || polys.iter().any(|p| p.n != n || p.degree != d) {
            return Err(Error::Input("symbols must share dimension and degree".into()));
        }
        Ok(Self { family: SymbolFamily::VectorPolySymbols { polys, scale: None }, dim_n: n, order_d: d as f64 })
    }

    /// `Σ_j |p_j⁰(x, ξ)|²` for the differential-operator families.
    pub fn sum_sq(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        let d = self.order_d;
        let tp = 2.0 * PI;
        match &self.family {
            SymbolFamily::RieszPower => {
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                Ok(tp.powf(2.0 * d) * r2.powf(d))
            }
            SymbolFamily::SpdQuadraticForm(a) => {
                let q = HomogeneousPoly::quadratic(&a(x)).eval(xi);
                Ok(tp.powi(4) * q * q)
            }
            SymbolFamily::FirstOrderMatrix(a) => {
                let m = a(x);
                let v = &m * nalgebra::DVector::from_column_slice(xi);
                Ok(tp * tp * v.norm_squared())
            }
            SymbolFamily::VectorPolySymbols { polys, scale } => {
                let s = scale.as_ref().map(|f| f(x));
                let k = tp.powf(2.0 * d);
                Ok(polys
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let v = p.eval(xi) * s.as_ref().map_or(1.0, |s| s[j]);
                        k * v * v
                    })
                    .sum())
            }
            SymbolFamily::ExplicitSphereProfile(_) => {
                Err(Error::Unsupported("an explicit sphere profile carries no symbol".into()))
            }
        }
    }

    /// Sampled homogeneity `Σ|p⁰(x,tξ)|² = t^{2d} Σ|p⁰(x,ξ)|²` and ellipticity
    /// `Σ|p⁰|² > 1e-9·|ξ|^{2d}` at the given directions.
    pub fn check_symbol(&self, x: &[f64], directions: &[Vec<f64>]) -> Result<()> {
        for xi in directions {
            let s1 = self.sum_sq(x, xi)?;
            let s2 = self.sum_sq(x, &xi.iter().map(|v| 1.7 * v).collect::<Vec<_>>())?;
            if (s2 - 1.7f64.powf(2.0 * self.order_d) * s1).abs() > 1e-9 * s2.abs().max(1e-300) {
                return Err(Error::Input("symbol is not homogeneous of degree d".into()));
            }
            let r: f64 = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(s1.sqrt() > 1e-9 * r.powf(self.order_d)) {
                return Err(Error::Ellipticity(format!("symbol vanishes at xi = {xi:?}")));
            }
        }
        Ok(())
    }
}

/// Three fourth-order operators on `R^4` built from second derivatives:
/// `P1 = (∂11, ∂22, ∂33, ∂44)`, `P2 = (∂11+∂22, ∂33+∂44)`,
/// `P3 = (∂11+∂22+∂33, ∂44)`.
pub fn r4_preset(which: usize) -> Result<SymbolSpec> {
    let blocks: Vec<Vec<usize>> = match which {
        1 => vec![vec![0], vec![1], vec![2], vec![3]],
        2 => vec![vec![0, 1], vec![2, 3]],
        3 => vec![vec![0, 1, 2], vec![3]],
        _ => return Err(Error::Parameter(format!("unknown preset P{which}"))),
    };
    SymbolSpec::vector_poly(4, blocks.iter().map(|b| HomogeneousPoly::sum_of_squares(4, b)).collect())
}

/// Block sizes of a [`r4_preset`] (each block contributes `|ξ_block|^2`).
pub fn r4_blocks(which: usize) -> Vec<usize> {
    match which {
        1 => vec![1, 1, 1, 1],
        2 => vec![2, 2],
        _ => vec![3, 1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_eval() {
        let p = HomogeneousPoly::new(2, vec![(1.0, vec![2, 0]), (3.0, vec![1, 1])]).unwrap();
        assert_eq!(p.eval(&[2.0, 1.0]), 4.0 + 6.0);
        assert!(HomogeneousPoly::new(2, vec![(1.0, vec![2, 0]), (1.0, vec![1, 0])]).is_err());
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        assert_eq!(HomogeneousPoly::quadratic(&a).eval(&[1.0, 2.0]), 2.0 + 4.0 + 12.0);
    }

    #[test]
    fn laplacian_symbols_agree() {
        let xi = [0.3, -0.2, 0.5, 0.1];
        let riesz = SymbolSpec::riesz(4, 2.0).sum_sq(&[], &xi).unwrap();
        let spd = SymbolSpec::spd_constant(DMatrix::identity(4, 4)).sum_sq(&[], &xi).unwrap();
        let poly = SymbolSpec::vector_poly(4, vec![HomogeneousPoly::sum_of_squares(4, &[0, 1, 2, 3])])
            .unwrap()
            .sum_sq(&[], &xi)
            .unwrap();
        assert!((riesz - spd).abs() < 1e-12 * riesz && (riesz - poly).abs() < 1e-12 * riesz);
    }

    #[test]
    fn ellipticity_detected() {
        let s = SymbolSpec::vector_poly(2, vec![HomogeneousPoly::sum_of_squares(2, &[0])]).unwrap();
        assert!(matches!(s.check_symbol(&[], &[vec![0.0, 1.0]]), Err(Error::Ellipticity(_))));
        assert!(r4_preset(2).unwrap().check_symbol(&[], &[vec![1.0, 0.0, 0.0, 0.0]]).is_ok());
    }
}
