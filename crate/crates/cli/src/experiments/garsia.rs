use adams_core::garsia::{default_lambda_grid, family_sweep, verify_claims, GarsiaInstance, GarsiaParams, StepFunction};
use serde_json::json;

use super::{finish, Ctx};
use crate::error::CliError;
use crate::output::{num, Check, Report, Table};

pub fn garsia(ctx: &Ctx) -> Result<Report, CliError> {
    let p = ctx.params;
    let defaults = GarsiaParams::default();
    let params = GarsiaParams {
        y1: p.get("y1", defaults.y1)?,
        h: p.get("H", defaults.h)?,
        beta: p.get("beta", defaults.beta)?,
        gamma: p.get("gamma", defaults.gamma)?,
        q: p.get("q", defaults.q)?,
    };
    p.require(params.beta > 1.0 && params.beta.is_finite(), "beta", "need beta > 1")?;
    p.require(params.gamma > 1.0 && params.gamma.is_finite(), "gamma", "need gamma > 1")?;
    p.require(params.h >= 0.0 && params.h.is_finite(), "H", "need H >= 0")?;
    p.require(params.q > 0.0 && params.q.is_finite(), "q", "need q > 0")?;
    p.require(params.y1.is_finite(), "y1", "must be finite")?;
    let size: usize = p.get("family-size", 1000)?;
    p.require(size >= 1, "family-size", "must be positive")?;
    let tol = ctx.tol.unwrap_or(0.05);

    let half = family_sweep(&params, size, ctx.seed)?;
    let full = family_sweep(&params, 2 * size, ctx.seed)?;
    let zero = verify_claims(&GarsiaInstance::new(params, StepFunction::zero(params.y1))?, &default_lambda_grid())?;
    let drift = (full.max_integral - half.max_integral).abs() / half.max_integral;
    let slope_ratio = full.max_level_slope / zero.linear_fit_slope;

    let mut table = Table::new(&["family_size", "max_integral", "min_inf_f", "max_level_slope", "max_e_ratio"]);
    for s in [&half, &full] {
        table.push_nums(&[s.size as f64, s.max_integral, s.min_inf_f, s.max_level_slope, s.max_e_ratio]);
    }
    let checks = vec![
        Check::pass_if("finite", full.max_integral.is_finite(), format!("family sup {}", full.max_integral)),
        Check::pass_if(
            "sup-stability",
            drift <= tol,
            format!("sup {} at {size}, {} at {}: drift {drift:.4}, tol {tol}", half.max_integral, full.max_integral, 2 * size),
        ),
        Check::pass_if("f-lower-bound", full.min_inf_f.is_finite(), format!("inf F >= {}", full.min_inf_f)),
        Check::pass_if(
            "level-set-growth",
            slope_ratio <= 1.2,
            format!("max slope {} vs phi = 0 slope {}: ratio {slope_ratio:.3}, limit 1.2", full.max_level_slope, zero.linear_fit_slope),
        ),
    ];
    let values = json!({
        "max_integral": num(full.max_integral),
        "max_integral_half": num(half.max_integral),
        "inf_F": num(full.min_inf_f),
        "level_slope": num(full.max_level_slope),
        "zero_phi_slope": num(zero.linear_fit_slope),
        "max_e_ratio": num(full.max_e_ratio),
    });
    Ok(finish(
        ctx,
        "F(y) = y - (int g(x,y) phi(x) dx)^beta, g = 1 + H(1+|x|)^(-gamma) (x <= y), H e^((y-x)/q) (x > y); sup_phi int_{y1}^inf e^(-F) < inf",
        values,
        checks,
        table,
    ))
}
