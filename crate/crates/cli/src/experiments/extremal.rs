use adams_core::extremal::{
    log_counterexample, moser_norm_regression, sharpness_sweep, ExtremalFamily, MeshOptions, MoserParams, Verdict as Growth,
};
use adams_core::measure::fmt_num;
use serde_json::json;

use super::{finish, Ctx};
use crate::config::Params;
use crate::error::CliError;
use crate::output::{num, nums, Check, Report, Table, Verdict};

fn mesh(p: &Params) -> Result<MeshOptions, CliError> {
    let per_shell: usize = p.get("per-shell", MeshOptions::default().per_shell)?;
    p.require((4..=1024).contains(&per_shell), "per-shell", "must lie in 4..=1024")?;
    Ok(MeshOptions { per_shell, ..MeshOptions::default() })
}

fn dims(p: &Params, n_default: usize, d_default: f64) -> Result<(usize, f64), CliError> {
    let n: usize = p.get("n", n_default)?;
    let d: f64 = p.get("d", d_default)?;
    p.require(n >= 1, "n", "need n >= 1")?;
    p.require(d > 0.0 && d < n as f64, "d", format!("need 0 < d < n, got n = {n}, d = {d}"))?;
    Ok((n, d))
}

pub fn sharpness_sweep_exp(ctx: &Ctx) -> Result<Report, CliError> {
    let p = ctx.params;
    let (n, d) = dims(p, 1, 0.5)?;
    p.require(n <= 2, "n", "meshes exist for n = 1 and n = 2 only")?;
    let lambda: f64 = p.get("lambda", n as f64)?;
    p.require(lambda > 0.0 && lambda <= n as f64, "lambda", format!("need 0 < lambda <= n, got {lambda}"))?;
    let m_min: u32 = p.get("m-min", 4)?;
    let m_max: u32 = p.get("m-max", 14)?;
    p.require(m_min >= 1, "m-min", "must be at least 1")?;
    p.require(m_max >= m_min + 3 && m_max <= 30, "m-max", "need m-min + 3 <= m-max <= 30")?;
    let mesh = mesh(p)?;
    let family = ExtremalFamily::riesz(n, d, lambda)?;
    let threshold = family.threshold();
    let alphas: Vec<f64> = p.list("alphas")?.unwrap_or_else(|| vec![0.8 * threshold, 1.2 * threshold]);
    p.require(!alphas.is_empty() && alphas.iter().all(|a| *a > 0.0 && a.is_finite()), "alphas", "need positive alphas")?;
    let tol = ctx.tol.unwrap_or(0.25);

    let ms: Vec<u32> = (m_min..=m_max).collect();
    let r = sharpness_sweep(&family, &alphas, &ms, mesh)?;
    let mut header = vec!["m".to_string(), "log_inv_r".to_string()];
    header.extend(alphas.iter().map(|a| format!("alpha={}", fmt_num(*a))));
    let mut table = Table { header, rows: Vec::new() };
    for (i, &m) in ms.iter().enumerate() {
        let mut row = vec![m.to_string(), fmt_num((1.0 / family.r_m(m)).ln())];
        row.extend(r.table[i].iter().map(|v| fmt_num(*v)));
        table.rows.push(row);
    }
    let mut checks = Vec::new();
    for v in &r.verdicts {
        let name = format!("alpha={}", fmt_num(v.alpha));
        let want = if v.alpha < threshold {
            Some(Growth::Bounded)
        } else if v.alpha > threshold {
            Some(Growth::Diverges)
        } else {
            None
        };
        let detail = format!("{:?}, fitted exponent {:.4}, predicted {:.4}", v.verdict, v.fitted_exponent, v.predicted_exponent);
        checks.push(match (v.verdict, want) {
            (_, None) => Check::new(&name, Verdict::Pass, format!("at threshold: {detail}")),
            (Growth::Inconclusive, _) => Check::new(&name, Verdict::Inconclusive, detail),
            (got, Some(w)) => Check::pass_if(&name, got == w, detail),
        });
        if v.alpha > threshold && v.verdict == Growth::Diverges {
            let rel = (v.fitted_exponent - v.predicted_exponent).abs() / v.predicted_exponent;
            checks.push(Check::pass_if(
                &format!("{name}-rate"),
                v.fitted_exponent > 0.0 && rel <= tol,
                format!("fitted {:.4} vs predicted {:.4}: relative {rel:.3}, tol {tol}", v.fitted_exponent, v.predicted_exponent),
            ));
        }
    }
    let values = json!({
        "threshold": num(threshold),
        "alphas": nums(&alphas),
        "ms": ms,
        "verdicts": r.verdicts,
    });
    Ok(finish(
        ctx,
        "int exp[alpha (|T Phi_m| / ||Phi_m||_beta')^beta] dnu bounded iff alpha <= beta0/(A beta); growth ~ r_m^(-(alpha A beta - beta0)(n-d))",
        values,
        checks,
        table,
    ))
}

pub fn moser_norms(ctx: &Ctx) -> Result<Report, CliError> {
    let p = ctx.params;
    let (n, d) = dims(p, 3, 2.0)?;
    p.require(d.fract() == 0.0, "d", "the Moser sequence needs an integer d")?;
    let d = d as usize;
    let defaults = MoserParams::default();
    let params = MoserParams { delta: p.get("delta", defaults.delta)?, ell: p.get("ell", defaults.ell.max(d))? };
    params.validate(d as f64).map_err(|e| CliError::Validation(e.to_string()))?;
    let ms: Vec<u32> = p.list("m-list")?.unwrap_or_else(|| (1..=10).map(|k| 100_000 * k).collect());
    p.require(ms.len() >= 3 && ms.windows(2).all(|w| w[1] > w[0]), "m-list", "need at least 3 increasing values")?;
    let tol = ctx.tol.unwrap_or(0.03);

    let r = moser_norm_regression(n, d, params, &ms)?;
    let mut table = Table::new(&["m", "log_inv_r", "norm_pow_p_prime"]);
    for i in 0..ms.len() {
        table.push_nums(&[ms[i] as f64, r.log_inv_r[i], r.norms[i]]);
    }
    let checks = vec![Check::pass_if(
        "slope",
        r.relative_error <= tol,
        format!("slope {} vs {}: relative {:.3e}, tol {tol}", r.slope, r.expected_slope, r.relative_error),
    )];
    let values = json!({
        "slope": num(r.slope),
        "expected_slope": num(r.expected_slope),
        "relative_error": num(r.relative_error),
        "middle_coefficient": num(r.middle_coefficient),
        "expected_middle": num(r.expected_middle),
    });
    Ok(finish(ctx, "||D^d u_m||_p^p' ~ log(1/r_m) / (omega_{n-1} c_d^p')", values, checks, table))
}

pub fn gamma_counterexample(ctx: &Ctx) -> Result<Report, CliError> {
    let p = ctx.params;
    let (n, d) = dims(p, 1, 0.5)?;
    p.require(n == 1, "n", "the counterexample mesh exists for n = 1 only")?;
    let rs: Vec<f64> = p.list("r-list")?.unwrap_or_else(|| (6..=16).map(|k| 2f64.powi(-k)).collect());
    let mut ks = Vec::with_capacity(rs.len());
    for &r in &rs {
        let k = -r.log2();
        p.require(r > 0.0 && r < 1.0 && k.fract() == 0.0, "r-list", format!("radii must be 2^-k with k >= 1, got {r}"))?;
        ks.push(k as u32);
    }
    p.require(ks.len() >= 4 && ks.windows(2).all(|w| w[1] > w[0]), "r-list", "need at least 4 strictly decreasing radii")?;
    p.require(*ks.last().unwrap() <= 24, "r-list", "radii below 2^-24 are not supported")?;
    let mesh = mesh(p)?;
    let tol = ctx.tol.unwrap_or(0.15);

    let r = log_counterexample(n, d, &ks, mesh)?;
    let mut table = Table::new(&["k", "r", "log_inv_r", "norm_pow", "norm_pow_exact", "integral", "control", "lower_bound"]);
    for row in &r.rows {
        table.push_nums(&[row.k as f64, row.r, row.log_inv_r, row.norm_pow, row.norm_pow_exact, row.integral, row.control, row.lower_bound]);
    }
    let rel = (r.fitted_exponent - r.expected_exponent).abs() / r.expected_exponent;
    let checks = vec![
        Check::pass_if(
            "growth-exponent",
            rel <= tol,
            format!("fitted {:.4} vs n beta/2 = {:.4}: relative {rel:.3}, tol {tol}", r.fitted_exponent, r.expected_exponent),
        ),
        Check::pass_if("control-bounded", r.control_verdict == Growth::Bounded, format!("{:?}", r.control_verdict)),
        Check::pass_if("lower-bound", r.lower_bound_holds, "integral >= (omega/n) 2^-n (log 1/r)^(n beta/2)"),
    ];
    let values = json!({
        "alpha": num(r.alpha),
        "fitted_exponent": num(r.fitted_exponent),
        "expected_exponent": num(r.expected_exponent),
        "control_fitted_exponent": num(r.control_fitted_exponent),
        "control_verdict": r.control_verdict,
        "lower_bound_holds": r.lower_bound_holds,
    });
    Ok(finish(
        ctx,
        "k(x,y) = |x-y|^(d-n) (1 + 1/(1 + |log|x-y||)); int exp[(n/omega_{n-1}) |T f_r|^beta] >= c (log 1/r)^(n beta/2)",
        values,
        checks,
        table,
    ))
}
