use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::constants::spd_power;
use crate::error::{Error, Result};
use crate::quadrature::sphere_integrate;
use crate::special::riesz_c_d;

/// Functions on `S^{n−1}` whose homogeneous extensions have known transforms.
///
/// For `f` (extended with degree `−d`) a quadratic form means
/// `c (ω^T A ω)^{−d/2}`; for `g` (extended with degree `d−n`) it means
/// `c (ω^T A ω)^{(d−n)/2}`. Both extend to `c |A^{1/2} x|^{degree}`.
#[derive(Clone)]
pub enum ParsevalFamily {
    Constant(f64),
    QuadraticForm { scale: f64, matrix: DMatrix<f64> },
    Other(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ParsevalFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::QuadraticForm { scale, matrix } => write!(f, "QuadraticForm({scale}, {matrix:?})"),
            Self::Other(_) => write!(f, "Other"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalReport {
    /// `∫ E_{−d}^∧(f) E_{d−n}^∧(g)` over the sphere.
    pub lhs: f64,
    /// `∫ f g` over the sphere.
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
}

/// `(scale, A^{1/2} (or I), A^{−1/2} (or I), det A)` of a supported family.
struct Extension {
    scale: f64,
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
    det: f64,
}

impl Extension {
    fn of(fam: &ParsevalFamily, n: usize) -> Result<Self> {
        match fam {
            ParsevalFamily::Constant(c) => Ok(Self {
                scale: *c,
                sqrt: DMatrix::identity(n, n),
                inv_sqrt: DMatrix::identity(n, n),
                det: 1.0,
            }),
            ParsevalFamily::QuadraticForm { scale, matrix } => {
                if matrix.nrows() != n {
                    return Err(Error::Input(format!("matrix is {}x{}, expected {n}x{n}", matrix.nrows(), matrix.ncols())));
                }
                Ok(Self {
                    scale: *scale,
                    sqrt: spd_power(matrix, 0.5)?,
                    inv_sqrt: spd_power(matrix, -0.5)?,
                    det: matrix.determinant(),
                })
            }
            ParsevalFamily::Other(_) => Err(Error::Unsupported(
                "transforms of general homogeneous distributions are not available".into(),
            )),
        }
    }

    /// `scale · |M w|^{e}`.
    fn eval(&self, m: &DMatrix<f64>, w: &[f64], e: f64) -> f64 {
        self.scale * (m * DVector::from_column_slice(w)).norm().powf(e)
    }
}

/// Spherical Parseval identity for the supported families, by adaptive sphere
/// quadrature. With `ĥ(ξ) = ∫ h(x) e^{−2πi x·ξ} dx`:
/// `(|A^{1/2}x|^{−d})^∧ = det(A)^{−1/2} (2π)^d c_d |A^{−1/2}ξ|^{d−n}` and
/// `(|B^{1/2}x|^{d−n})^∧ = det(B)^{−1/2} (2π)^{n−d} c_{n−d} |B^{−1/2}ξ|^{−d}`.
pub fn spherical_parseval_check(f: &ParsevalFamily, g: &ParsevalFamily, n: usize, d: f64, rel_tol: f64) -> Result<ParsevalReport> {
    let nf = n as f64;
    if n < 2 || !(d > 0.0 && d < nf) {
        return Err(Error::Domain(format!("need n >= 2 and 0 < d < n, got n={n}, d={d}")));
    }
    let ef = Extension::of(f, n)?;
    let eg = Extension::of(g, n)?;
    let cf = (2.0 * std::f64::consts::PI).powf(d) * riesz_c_d(n, d)? / ef.det.sqrt();
    let cg = (2.0 * std::f64::consts::PI).powf(nf - d) * riesz_c_d(n, nf - d)? / eg.det.sqrt();
    let lhs = sphere_integrate(n, rel_tol, |w| {
        cf * ef.eval(&ef.inv_sqrt, w, d - nf) * cg * eg.eval(&eg.inv_sqrt, w, -d)
    })
    .value;
    let rhs = sphere_integrate(n, rel_tol, |w| ef.eval(&ef.sqrt, w, -d) * eg.eval(&eg.sqrt, w, d - nf)).value;
    let residual = (lhs - rhs).abs();
    Ok(ParsevalReport { lhs, rhs, residual, relative: residual / rhs.abs().max(f64::MIN_POSITIVE) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_reduce_to_gamma_identity() {
        for (n, d) in [(2usize, 1.0), (3, 2.0), (4, 1.5), (5, 3.0)] {
            let r = spherical_parseval_check(&ParsevalFamily::Constant(1.0), &ParsevalFamily::Constant(1.0), n, d, 1e-12).unwrap();
            assert!(r.relative < 1e-12, "n={n} d={d}: {r:?}");
        }
    }

    #[test]
    fn quadratic_forms() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, -0.2, 0.0, -0.2, 0.7, 0.0, 0.0, 0.0, 1.2]);
        let f = ParsevalFamily::QuadraticForm { scale: 1.0, matrix: a };
        let g = ParsevalFamily::QuadraticForm { scale: 0.5, matrix: b };
        let r = spherical_parseval_check(&f, &g, 3, 2.0, 1e-11).unwrap();
        assert!(r.relative < 1e-8, "{r:?}");
    }

    #[test]
    fn bilinear_in_f() {
        let one = ParsevalFamily::Constant(1.0);
        let a = spherical_parseval_check(&one, &one, 3, 1.0, 1e-12).unwrap();
        let b = spherical_parseval_check(&ParsevalFamily::Constant(2.0), &one, 3, 1.0, 1e-12).unwrap();
        assert!((b.lhs - 2.0 * a.lhs).abs() < 1e-12 * b.lhs && (b.rhs - 2.0 * a.rhs).abs() < 1e-12 * b.rhs);
    }

    #[test]
    fn other_is_unsupported() {
        let other = ParsevalFamily::Other(Arc::new(|w| w[0]));
        assert!(matches!(
            spherical_parseval_check(&other, &ParsevalFamily::Constant(1.0), 3, 1.0, 1e-10),
            Err(Error::Unsupported(_))
        ));
    }
}
