use std::collections::HashSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// A finite measure given by positive weights on points. Points carry an
/// identifier and, for quadrature spaces, coordinates in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasureSpace {
    ids: Vec<String>,
    coords: Option<Vec<Vec<f64>>>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl FiniteMeasureSpace {
    /// Atomic space with identifiers `0..len`.
    pub fn atomic(weights: Vec<f64>) -> Result<Self> {
        let ids = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(ids, None, weights)
    }

    /// `count` atoms of equal weight summing to `mass`.
    pub fn uniform(count: usize, mass: f64) -> Result<Self> {
        Self::atomic(vec![mass / count as f64; count])
    }

    /// Quadrature space: nodes in `R^n` with cell weights.
    pub fn grid(coords: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let ids = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(ids, Some(coords), weights)
    }

    pub fn new(ids: Vec<String>, coords: Option<Vec<Vec<f64>>>, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Input("measure space must have at least one point".into()));
        }
        if ids.len() != weights.len() {
            return Err(Error::Input("ids and weights differ in length".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Input(format!("weight {} at index {i} is not positive and finite", weights[i])));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Input(format!("duplicate point identifier {id:?}")));
            }
        }
        if let Some(c) = &coords {
            if c.len() != weights.len() {
                return Err(Error::Input("coordinates and weights differ in length".into()));
            }
            let dim = c[0].len();
            if c.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
                return Err(Error::Input("coordinates must be finite with a common dimension".into()));
            }
        }
        let total_mass = weights.iter().sum();
        Ok(Self { ids, coords, weights, total_mass })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn point(&self, i: usize) -> Option<&[f64]> {
        self.coords.as_ref().map(|c| c[i].as_slice())
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `(Σ w_j |f_j|^p)^{1/p}`.
    pub fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        assert_eq!(f.len(), self.len());
        if p.is_infinite() {
            return f.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let s: f64 = f.iter().zip(&self.weights).map(|(v, w)| w * v.abs().powf(p)).sum();
        s.powf(1.0 / p)
    }

    /// `Σ w_j f_j`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Read `id,weight[,x1,...,xn]` rows with a header line.
    pub fn from_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "id" || &headers[1] != "weight" {
            return Err(Error::Input("CSV header must start with id,weight".into()));
        }
        let dim = headers.len() - 2;
        for (k, h) in headers.iter().skip(2).enumerate() {
            if h != format!("x{}", k + 1) {
                return Err(Error::Input(format!("unexpected column {h:?}; expected x{}", k + 1)));
            }
        }
        let mut ids = Vec::new();
        let mut weights = Vec::new();
        let mut coords = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Input(format!("row {}: cannot parse {s:?} as a number", line + 2)))
            };
            ids.push(rec[0].to_string());
            weights.push(parse(&rec[1])?);
            if dim > 0 {
                coords.push((0..dim).map(|k| parse(&rec[2 + k])).collect::<Result<Vec<_>>>()?);
            }
        }
        Self::new(ids, if dim > 0 { Some(coords) } else { None }, weights)
    }

    pub fn to_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let dim = self.coords.as_ref().map_or(0, |c| c[0].len());
        let mut header = vec!["id".to_string(), "weight".to_string()];
        header.extend((1..=dim).map(|k| format!("x{k}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![self.ids[i].clone(), fmt_num(self.weights[i])];
            if let Some(c) = &self.coords {
                row.extend(c[i].iter().map(|v| fmt_num(*v)));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Decimal with 15 significant digits and `.` as separator.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{:.14e}", v)
            .parse::<f64>()
            .map(|x| format!("{x}"))
            .unwrap_or_else(|_| v.to_string())
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights_and_duplicates() {
        assert!(FiniteMeasureSpace::atomic(vec![1.0, 0.0]).is_err());
        assert!(FiniteMeasureSpace::atomic(vec![1.0, f64::INFINITY]).is_err());
        assert!(FiniteMeasureSpace::atomic(vec![]).is_err());
        assert!(FiniteMeasureSpace::new(vec!["a".into(), "a".into()], None, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let sp = FiniteMeasureSpace::grid(vec![vec![0.1, 0.2], vec![-1.5, 3.0]], vec![0.25, 1.0 / 3.0]).unwrap();
        let mut buf = Vec::new();
        sp.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,weight,x1,x2"));
        let back = FiniteMeasureSpace::from_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back.weights()[1] - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(back.point(1).unwrap(), &[-1.5, 3.0]);
    }

    #[test]
    fn csv_reports_bad_rows() {
        let err = FiniteMeasureSpace::from_csv("id,weight\na,1\nb,oops\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 3"));
    }

    #[test]
    fn fifteen_digits() {
        assert_eq!(fmt_num(std::f64::consts::PI), "3.14159265358979");
        assert_eq!(fmt_num(0.5), "0.5");
    }
}
