use std::io::Write;

use super::space::fmt_num;
use crate::error::{Error, Result};

/// A right-continuous nonincreasing step function on `(0, T]`: value `v_k` on
/// `[t_{k-1}, t_k)` with `t_0 = 0`. Beyond `t_K` the function is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    // prefix[k] = ∫_0^{t_k} f*, prefix[0] = 0
    prefix: Vec<f64>,
}

impl RearrangementProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() || breakpoints.is_empty() {
            return Err(Error::Input("profile needs equally many (nonzero) breakpoints and values".into()));
        }
        if breakpoints[0] <= 0.0 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input("breakpoints must be positive and strictly increasing".into()));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::Input("breakpoints must be finite".into()));
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) || values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Input("values must be nonnegative and nonincreasing".into()));
        }
        Ok(Self::build(breakpoints, values))
    }

    fn build(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (t, v) in breakpoints.iter().zip(&values) {
            let len = t - prev;
            acc += if *v == 0.0 { 0.0 } else { v * len };
            prefix.push(acc);
            prev = *t;
        }
        Self { breakpoints, values, prefix }
    }

    /// Atoms `(|f|, weight)` already sorted by decreasing value; consecutive
    /// equal values are merged.
    pub(crate) fn from_sorted_atoms(pairs: &[(f64, f64)]) -> Self {
        let mut bps = Vec::with_capacity(pairs.len());
        let mut vals: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut t = 0.0;
        for &(v, w) in pairs {
            t += w;
            if vals.last() == Some(&v) {
                *bps.last_mut().unwrap() = t;
            } else {
                vals.push(v);
                bps.push(t);
            }
        }
        Self::build(bps, vals)
    }

    /// Step profile sampling a nonincreasing function at the right end of each
    /// interval: `v_k = f(t_k)`.
    pub fn sample(f: impl Fn(f64) -> f64, breakpoints: Vec<f64>) -> Result<Self> {
        let values = breakpoints.iter().map(|&t| f(t)).collect();
        Self::new(breakpoints, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right end of the support of the representation, the total mass of the
    /// underlying space for rearranged functions.
    pub fn total_mass(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Index of the interval containing `t`, or `len` if `t ≥ t_K`.
    fn locate(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t)
    }

    /// `f*(t)` for `t > 0`.
    pub fn value(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("f* is defined for t > 0, got {t}")));
        }
        let k = self.locate(t);
        Ok(if k < self.values.len() { self.values[k] } else { 0.0 })
    }

    /// `f*(0+)`, the essential supremum.
    pub fn sup(&self) -> f64 {
        self.values[0]
    }

    /// `m(f*, s)`.
    pub fn distribution(&self, s: f64) -> f64 {
        let k = self.values.partition_point(|&v| v > s);
        if k == 0 {
            0.0
        } else {
            self.breakpoints[k - 1]
        }
    }

    /// `∫_0^t f*`.
    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let k = self.locate(t);
        if k >= self.values.len() {
            return self.prefix[self.values.len()];
        }
        let t0 = if k == 0 { 0.0 } else { self.breakpoints[k - 1] };
        let v = self.values[k];
        if v == 0.0 {
            self.prefix[k]
        } else {
            self.prefix[k] + v * (t - t0)
        }
    }

    /// `∫_0^∞ f*`.
    pub fn integral(&self) -> f64 {
        self.prefix[self.values.len()]
    }

    /// `∫_a^b f*(u) w(u) du` for a weight given as another profile.
    pub fn integral_product(&self, other: &RearrangementProfile, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut cuts: Vec<f64> = vec![a, b];
        cuts.extend(self.breakpoints.iter().chain(other.breakpoints.iter()).filter(|&&t| t > a && t < b));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut s = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let u = if lo > 0.0 { lo } else { mid };
            let (f, g) = (self.value(u).unwrap_or(0.0), other.value(u).unwrap_or(0.0));
            if f != 0.0 && g != 0.0 {
                s += f * g * (hi - lo);
            }
        }
        s
    }

    /// `f**(t) = (1/t) ∫_0^t f*`.
    pub fn double_star(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("f** is defined for t > 0, got {t}")));
        }
        Ok(self.integral_to(t) / t)
    }

    /// Write `t,value` rows, one per breakpoint.
    pub fn to_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "value"])?;
        for (t, v) in self.breakpoints.iter().zip(&self.values) {
            w.write_record([fmt_num(*t), fmt_num(*v)])?;
        }
        w.flush()?;
        Ok(())
    }
}
