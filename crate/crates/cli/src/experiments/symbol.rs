use std::sync::Arc;

use adams_core::optimize::{SearchDomain, SearchOptions};
use adams_core::quadrature::geometric_grid;
use adams_core::symbol::{
    adams_trace_constant, r4_preset, distribution_asymptotics, elliptic_p2_constant, first_order_vector_constant,
    second_order_constant, spherical_parseval_check, vector_p2_constant, AsymptoticsOptions, KernelSpec, Method,
    P2Options, ParsevalFamily, RegionSpec, SharpConstantReport, SymbolSpec,
};
use adams_core::Error;
use nalgebra::DMatrix;
use serde_json::json;

use super::{finish, Ctx};
use crate::config::Params;
use crate::error::CliError;
use crate::output::{num, nums, Check, Report, Table, Verdict};

fn matrix_or_identity(p: &Params, key: &str, n: usize) -> Result<DMatrix<f64>, CliError> {
    match p.matrix(key)? {
        None => Ok(DMatrix::identity(n, n)),
        Some(rows) => {
            p.require(rows.len() == n, key, format!("matrix must be {n}x{n}"))?;
            Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
        }
    }
}

fn spd_check(p: &Params, key: &str, a: &DMatrix<f64>) -> Result<(), CliError> {
    let sym = (a - a.transpose()).abs().max() <= 1e-12 * a.abs().max().max(1.0);
    p.require(sym && a.clone().cholesky().is_some(), key, "matrix must be symmetric positive definite")
}

enum Family {
    Riesz { n: usize, d: usize, lambda: f64 },
    SecondOrder { n: usize, a: DMatrix<f64> },
    FirstOrder { n: usize, a: DMatrix<f64> },
    EllipticP2 { a: DMatrix<f64> },
    VectorP2 { preset: usize },
}

fn sharp_const_family(p: &Params) -> Result<Family, CliError> {
    let family = p.raw("family").unwrap_or("riesz");
    let n: usize = p.get("n", 4)?;
    p.require(n >= 1, "n", "need n >= 1")?;
    match family {
        "riesz" => {
            let d: f64 = p.get("d", n as f64 / 2.0)?;
            p.require(d > 0.0 && d < n as f64, "d", format!("need 0 < d < n, got n = {n}, d = {d}"))?;
            p.require(d.fract() == 0.0, "d", "the closed form needs an integer d")?;
            let lambda: f64 = p.get("lambda", n as f64)?;
            p.require(lambda > 0.0 && lambda <= n as f64, "lambda", format!("need 0 < lambda <= n, got {lambda}"))?;
            Ok(Family::Riesz { n, d: d as usize, lambda })
        }
        "second-order" => {
            p.require(n >= 3, "n", "the second-order constant needs n >= 3")?;
            let a = matrix_or_identity(p, "matrix", n)?;
            spd_check(p, "matrix", &a)?;
            Ok(Family::SecondOrder { n, a })
        }
        "first-order" => {
            p.require(n >= 2, "n", "the first-order constant needs n >= 2")?;
            let a = matrix_or_identity(p, "matrix", n)?;
            p.require(a.determinant().abs() > 1e-12, "matrix", "matrix must be invertible")?;
            Ok(Family::FirstOrder { n, a })
        }
        "elliptic-p2" => {
            let a = matrix_or_identity(p, "matrix", 4)?;
            spd_check(p, "matrix", &a)?;
            Ok(Family::EllipticP2 { a })
        }
        "vector-p2" => {
            let preset = p.raw("preset").unwrap_or("r4-P2");
            let which = match preset {
                "r4-P1" => 1,
                "r4-P2" => 2,
                "r4-P3" => 3,
                _ => return Err(p.error("preset", "expected r4-P1, r4-P2 or r4-P3")),
            };
            Ok(Family::VectorP2 { preset: which })
        }
        other => Err(p.error(
            "family",
            format!("unknown family {other:?}; expected riesz, second-order, first-order, elliptic-p2, vector-p2"),
        )),
    }
}

pub fn sharp_const(ctx: &Ctx) -> Result<Report, CliError> {
    let p = ctx.params;
    let family = sharp_const_family(p)?;
    let samples: usize = p.get("samples", P2Options::default().samples)?;
    p.require(samples >= 1000, "samples", "need at least 1000 samples")?;
    let expected: Option<f64> = p.parsed("expected")?;
    p.require(expected.is_none_or(|e| e > 0.0 && e.is_finite()), "expected", "must be positive and finite")?;

    let p2 = P2Options { samples, seed: ctx.seed, ..P2Options::default() };
    let at_origin = |n: usize| SearchDomain::point(vec![0.0; n]);
    let report: SharpConstantReport = match family {
        Family::Riesz { n, d, lambda } => adams_trace_constant(n, d, lambda)?,
        Family::SecondOrder { n, a } => second_order_constant(n, Arc::new(move |_| a.clone()), &at_origin(n), SearchOptions::default())?,
        Family::FirstOrder { n, a } => first_order_vector_constant(n, Arc::new(move |_| a.clone()), &at_origin(n), SearchOptions::default())?,
        Family::EllipticP2 { a } => elliptic_p2_constant(&SymbolSpec::spd_constant(a), &at_origin(4), p2)?,
        Family::VectorP2 { preset } => vector_p2_constant(&r4_preset(preset)?, &at_origin(4), p2)?,
    };

    let mut checks = Vec::new();
    if let Some(agree) = report.routes_agree {
        let detail = report
            .cross_checks
            .iter()
            .map(|r| format!("{:?}: A = {} (+/- {:.1e})", r.method, r.a_value, r.error_estimate))
            .collect::<Vec<_>>()
            .join("; ");
        checks.push(Check::pass_if("routes-agree", agree, detail));
    }
    if let Some(e) = expected {
        let default_tol = if report.method == Method::MonteCarlo || !report.cross_checks.is_empty() { 1e-3 } else { 1e-8 };
        let tol = ctx.tol.unwrap_or(default_tol);
        let rel = (report.constant_value - e).abs() / e;
        checks.push(Check::pass_if("expected", rel <= tol, format!("constant {} vs expected {e}: relative {rel:.3e}, tol {tol:e}", report.constant_value)));
    }
    let mut table = Table::new(&["route", "a_value", "error_estimate"]);
    table.rows.push(vec![format!("{:?}", report.method), adams_core::measure::fmt_num(report.a_value), adams_core::measure::fmt_num(report.error_estimate)]);
    for r in &report.cross_checks {
        table.rows.push(vec![format!("{:?}", r.method), adams_core::measure::fmt_num(r.a_value), adams_core::measure::fmt_num(r.error_estimate)]);
    }
    let values = json!({
        "constant": num(report.constant_value),
        "A": num(report.a_value),
        "exponent": num(report.exponent),
        "beta0_over_beta": num(report.beta0_over_beta),
        "method": report.method,
        "error_estimate": num(report.error_estimate),
        "cross_checks": report.cross_checks,
        "routes_agree": report.routes_agree,
        "extremizer": report.extremizer.as_deref().map(nums),
        "sharp": report.sharp,
        "unverified": report.unverified,
    });
    Ok(finish(ctx, &report.formula_ref, values, checks, table))
}

fn parseval_family(p: &Params, which: &str, n: usize) -> Result<ParsevalFamily, CliError> {
    let scale: f64 = p.get(&format!("{which}-scale"), 1.0)?;
    p.require(scale.is_finite() && scale != 0.0, &format!("{which}-scale"), "must be finite and nonzero")?;
    match p.raw(which).unwrap_or("constant") {
        "constant" => Ok(ParsevalFamily::Constant(scale)),
        "quadratic" => {
            let key = format!("{which}-matrix");
            let matrix = match p.matrix(&key)? {
                None => DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| 1.0 + i as f64)),
                Some(_) => matrix_or_identity(p, &key, n)?,
            };
            spd_check(p, &key, &matrix)?;
            Ok(ParsevalFamily::QuadraticForm { scale, matrix })
        }
        other => Err(p.error(which, format!("unknown family {other:?}; expected constant or quadratic"))),
    }
}

pub fn parseval(ctx: &Ctx) -> Result<Report, CliError> {
    let p = ctx.params;
    let n: usize = p.get("n", 3)?;
    p.require(n >= 2, "n", "need n >= 2")?;
    let d: f64 = p.get("d", 1.0)?;
    p.require(d > 0.0 && d < n as f64, "d", format!("need 0 < d < n, got n = {n}, d = {d}"))?;
    let f = parseval_family(p, "f", n)?;
    let g = parseval_family(p, "g", n)?;
    let tol = ctx.tol.unwrap_or(1e-8);
    let r = spherical_parseval_check(&f, &g, n, d, 1e-12)?;
    let mut table = Table::new(&["lhs", "rhs", "residual", "relative"]);
    table.push_nums(&[r.lhs, r.rhs, r.residual, r.relative]);
    let checks = vec![Check::pass_if("parseval", r.relative <= tol, format!("relative residual {:.3e}, tol {tol:e}", r.relative))];
    let values = json!({"lhs": num(r.lhs), "rhs": num(r.rhs), "residual": num(r.residual), "relative": num(r.relative)});
    Ok(finish(ctx, "int_S E_{-d}^(f) E_{d-n}^(g) = int_S f g", values, checks, table))
}

pub fn distribution_asymptotics_exp(ctx: &Ctx) -> Result<Report, CliError> {
    let p = ctx.params;
    let n: usize = p.get("n", 2)?;
    p.require(n >= 1, "n", "need n >= 1")?;
    let d: f64 = p.get("d", 1.0)?;
    p.require(d > 0.0 && d < n as f64, "d", format!("need 0 < d < n, got n = {n}, d = {d}"))?;
    let radius: f64 = p.get("radius", 1.0)?;
    p.require(radius > 0.0 && radius.is_finite(), "radius", "must be positive")?;
    let s_min: f64 = p.get("s-min", 10.0)?;
    let s_max: f64 = p.get("s-max", 1e4)?;
    p.require(s_min > 0.0, "s-min", "must be positive")?;
    p.require(s_max > s_min && s_max.is_finite(), "s-max", "must exceed s-min")?;
    let levels: usize = p.get("levels", 12)?;
    p.require(levels >= 4, "levels", "need at least 4 levels")?;
    let defaults = AsymptoticsOptions::default();
    let opts = AsymptoticsOptions {
        directions: p.get("directions", defaults.directions)?,
        radial_cells: p.get("radial-cells", defaults.radial_cells)?,
        ..defaults
    };
    p.require(opts.directions >= 4, "directions", "need at least 4")?;
    p.require(opts.radial_cells >= 10, "radial-cells", "need at least 10")?;

    let kernel = KernelSpec::riesz(n, d)?;
    let p_prime = n as f64 / (n as f64 - d);
    let grid = geometric_grid(s_min, s_max, levels);
    let region = RegionSpec::Ball { center: vec![0.0; n], radius };
    let formula = "|{y : |K(x,y)| > s}| ~ A s^(-p'), A = (1/n) int_S |g(x,w)|^p' dw, p' = n/(n-d)";
    let r = match distribution_asymptotics(&kernel, &grid, &[vec![0.0; n]], &region, opts) {
        Ok(r) => r,
        Err(Error::Inconclusive(msg)) => {
            let checks = vec![Check::new("fit", Verdict::Inconclusive, msg)];
            return Ok(finish(ctx, formula, json!({}), checks, Table::new(&["s", "measure"])));
        }
        Err(e) => return Err(e.into()),
    };
    let tol = ctx.tol.unwrap_or(0.02);
    let mut table = Table::new(&["s", "measure"]);
    for (s, m) in &r.row_measures {
        table.push_nums(&[*s, *m]);
    }
    let a_exp = r.a_expected.unwrap_or(f64::NAN);
    let a_rel = (r.a_hat - a_exp).abs() / a_exp;
    let mut checks = vec![Check::pass_if("coefficient", a_rel <= tol, format!("A fitted {} vs {a_exp}: relative {a_rel:.3e}, tol {tol}", r.a_hat))];
    match r.exponent_hat {
        Some(e) => {
            let rel = (e - p_prime).abs() / p_prime;
            checks.push(Check::pass_if("exponent", rel <= 0.01, format!("exponent {e} vs {p_prime}: relative {rel:.3e}, tol 0.01")));
        }
        None => checks.push(Check::new("exponent", Verdict::Inconclusive, "all level sets empty")),
    }
    let values = json!({
        "a_hat": num(r.a_hat),
        "a_expected": num(a_exp),
        "exponent_hat": r.exponent_hat.map(num),
        "p_prime": num(p_prime),
        "upper_b": num(r.upper_b),
        "fit_residual": num(r.fit_residual),
    });
    Ok(finish(ctx, formula, values, checks, table))
}
