use serde::Serialize;

/// How a constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    SphereQuadrature,
    MonteCarlo,
}

/// An independent evaluation of the same `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteValue {
    pub method: Method,
    pub a_value: f64,
    /// Relative error estimate of `a_value`.
    pub error_estimate: f64,
}

/// A sharp exponential constant `β₀/(Aβ)` with the `A` it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpConstantReport {
    pub constant_value: f64,
    pub a_value: f64,
    /// The exponent `β` (or `p′`) of the inequality.
    pub exponent: f64,
    /// `β₀/β`; 1 unless a trace measure is involved.
    pub beta0_over_beta: f64,
    pub method: Method,
    /// Relative error estimate of the constant.
    pub error_estimate: f64,
    pub formula_ref: String,
    /// Where the `sup`/`inf` over `x` was found, when one was taken.
    pub extremizer: Option<Vec<f64>>,
    pub cross_checks: Vec<RouteValue>,
    /// Whether the independent routes agree within their combined error.
    pub routes_agree: Option<bool>,
    /// Whether the extremum is attained where sharpness is guaranteed.
    pub sharp: Option<bool>,
    /// Hypotheses the computation does not certify.
    pub unverified: Vec<String>,
}

impl SharpConstantReport {
    pub(crate) fn new(a_value: f64, exponent: f64, beta0_over_beta: f64, method: Method, formula: &str) -> Self {
        Self {
            constant_value: beta0_over_beta / a_value,
            a_value,
            exponent,
            beta0_over_beta,
            method,
            error_estimate: 0.0,
            formula_ref: formula.to_string(),
            extremizer: None,
            cross_checks: Vec::new(),
            routes_agree: None,
            sharp: None,
            unverified: Vec::new(),
        }
    }

    /// The value of `A` from the route using `method`, if present.
    pub fn route(&self, method: Method) -> Option<&RouteValue> {
        if self.method == method {
            return None;
        }
        self.cross_checks.iter().find(|r| r.method == method)
    }

    /// Constant implied by the route using `method` (primary or cross-check).
    pub fn constant_by(&self, method: Method) -> Option<f64> {
        if self.method == method {
            Some(self.constant_value)
        } else {
            self.route(method).map(|r| self.beta0_over_beta / r.a_value)
        }
    }
}
