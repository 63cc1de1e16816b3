use adams_core::measure::{distribution, rearrange, FiniteMeasureSpace};
use adams_core::operator::{
    oneil_grids, random_instance, verify_oneil_power, verify_oneil_sharp, verify_weak_type, IntegralOperator, Operator,
};
use adams_core::ExponentSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{finish, geometric, Ctx};
use crate::error::CliError;
use crate::output::{num, Check, Report, Table};

/// Worst discrepancy between the profile's distribution function and the
/// brute-force level-set measure, probed at every value and between values.
fn equimeasurability_gap(f: &[f64], space: &FiniteMeasureSpace) -> Result<(f64, f64), CliError> {
    let prof = rearrange(f, space)?;
    let mut levels: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    levels.sort_by(f64::total_cmp);
    let mut probes = levels.clone();
    probes.extend(levels.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    probes.push(0.0);
    let mut gap: f64 = 0.0;
    for &s in &probes {
        let brute: f64 = f.iter().zip(space.weights()).filter(|(v, _)| v.abs() > s).map(|(_, w)| w).sum();
        gap = gap.max((prof.distribution(s) - brute).abs());
        gap = gap.max((distribution(f, space, s)? - brute).abs());
    }
    let mass: f64 = f.iter().zip(space.weights()).map(|(v, w)| v.abs() * w).sum();
    Ok((gap, (prof.integral() - mass).abs() / mass.max(1.0)))
}

/// `k1*`, `k2*` against the pointwise sup of the row and column profiles.
fn kernel_profile_gap(op: &IntegralOperator) -> Result<f64, CliError> {
    let k = op.kernel();
    let side = |profile: &adams_core::RearrangementProfile, lines: Vec<Vec<f64>>, space: &FiniteMeasureSpace| {
        let profs = lines.iter().map(|l| rearrange(l, space)).collect::<adams_core::Result<Vec<_>>>()?;
        let mut gap: f64 = 0.0;
        let mut ts: Vec<f64> = profs.iter().flat_map(|p| p.breakpoints().to_vec()).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut prev = 0.0;
        for &t in &ts {
            let probe = 0.5 * (prev + t);
            prev = t;
            let brute = profs.iter().map(|p| p.value(probe).unwrap_or(0.0)).fold(0.0, f64::max);
            gap = gap.max((profile.value(probe)? - brute).abs());
        }
        Ok::<f64, adams_core::Error>(gap)
    };
    let rows = (0..k.rows()).map(|i| k.row(i).to_vec()).collect();
    let cols = (0..k.cols()).map(|j| k.column(j)).collect();
    Ok(side(op.k1_star(), rows, op.domain())?.max(side(op.k2_star(), cols, op.codomain())?))
}

pub fn rearrange_exp(ctx: &Ctx) -> Result<Report, CliError> {
    let p = ctx.params;
    let tol = ctx.tol.unwrap_or(1e-12);
    if let Some(path) = p.raw("space") {
        let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        let space = FiniteMeasureSpace::from_csv(file)?;
        let values: Vec<f64> = p.list("values")?.unwrap_or_default();
        p.require(values.len() == space.len(), "values", format!("need {} values, one per point of the space", space.len()))?;
        let prof = rearrange(&values, &space)?;
        let (gap, mass_err) = equimeasurability_gap(&values, &space)?;
        let mut table = Table::new(&["t_start", "t_end", "value"]);
        let mut start = 0.0;
        for (t, v) in prof.breakpoints().iter().zip(prof.values()) {
            table.push_nums(&[start, *t, *v]);
            start = *t;
        }
        let checks = vec![
            Check::pass_if("equimeasurable", gap <= tol, format!("max |m(f*,s) - m(f,s)| = {gap:e}")),
            Check::pass_if("mass", mass_err <= tol, format!("relative error of int f* = {mass_err:e}")),
        ];
        let values = json!({"total_mass": num(space.total_mass()), "sup": num(prof.sup()), "integral": num(prof.integral())});
        return Ok(finish(ctx, "m(f,s) = mu{|f| > s}; f*(t) = inf{s : m(f,s) <= t}", values, checks, table));
    }
    p.require(p.raw("values").is_none(), "values", "values need a space file")?;
    let instances: usize = p.get("instances", 1000)?;
    let atoms: usize = p.get("atoms", 8)?;
    p.require(instances > 0, "instances", "must be positive")?;
    p.require((1..=64).contains(&atoms), "atoms", "must lie in 1..=64")?;

    let rows: Vec<(f64, f64, f64)> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            rng.set_stream(i as u64);
            let inst = random_instance(&mut rng, atoms, atoms, 1)?;
            let (gap, mass) = equimeasurability_gap(&inst.functions[0], inst.op.domain())?;
            Ok((gap, mass, kernel_profile_gap(&inst.op)?))
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(&["instance", "distribution_gap", "mass_error", "kernel_profile_gap"]);
    for (i, r) in rows.iter().enumerate() {
        table.push_nums(&[i as f64, r.0, r.1, r.2]);
    }
    let worst = |f: fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let count = |f: fn(&(f64, f64, f64)) -> f64| rows.iter().filter(|r| f(r) > tol).count();
    let (g, m, k) = (worst(|r| r.0), worst(|r| r.1), worst(|r| r.2));
    let checks = vec![
        Check::pass_if("equimeasurable", count(|r| r.0) == 0, format!("worst gap {g:e}")),
        Check::pass_if("mass", count(|r| r.1) == 0, format!("worst relative error {m:e}")),
        Check::pass_if("kernel-profile-sup", count(|r| r.2) == 0, format!("worst gap {k:e}")),
    ];
    let values = json!({
        "instances": instances,
        "atoms": atoms,
        "max_distribution_gap": num(g),
        "max_mass_error": num(m),
        "max_kernel_profile_gap": num(k),
        "violations": count(|r| r.0) + count(|r| r.1) + count(|r| r.2),
    });
    Ok(finish(ctx, "m(f*,s) = m(f,s); int f* = int |f|; k1*(t) = sup_x k(x,.)*(t)", values, checks, table))
}

struct OperatorSetup {
    instances: usize,
    atoms: usize,
    functions: usize,
    grid: usize,
    exps: ExponentSet,
}

fn operator_setup(ctx: &Ctx) -> Result<OperatorSetup, CliError> {
    let p = ctx.params;
    let instances: usize = p.get("instances", 1000)?;
    let atoms: usize = p.get("atoms", 8)?;
    let functions: usize = p.get("functions", 3)?;
    let grid: usize = p.get("grid", 20)?;
    let beta: f64 = p.get("beta", 2.0)?;
    let beta0: f64 = p.get("beta0", 1.5)?;
    p.require(instances > 0, "instances", "must be positive")?;
    p.require((1..=64).contains(&atoms), "atoms", "must lie in 1..=64")?;
    p.require(functions > 0, "functions", "must be positive")?;
    p.require(grid >= 2, "grid", "need at least 2 points")?;
    p.require(beta > 1.0, "beta", "need beta > 1")?;
    p.require(beta0 > 0.0 && beta0 <= beta, "beta0", "need 0 < beta0 <= beta")?;
    let exps = ExponentSet::new(beta, beta0, 2.0, p.parsed("p")?, 1.0, 1.0)
        .map_err(|e| crate::error::CliError::Validation(e.to_string()))?;
    Ok(OperatorSetup { instances, atoms, functions, grid, exps })
}

/// Instance `i` of the seeded family, kernel normalized to `M̃ = 1`.
fn normalized_instance(seed: u64, i: usize, s: &OperatorSetup) -> Result<(IntegralOperator, Vec<Vec<f64>>), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let inst = random_instance(&mut rng, s.atoms, s.atoms, s.functions)?;
    let m = inst.op.k1_power_coefficient(s.exps.beta);
    Ok((inst.op.scaled(1.0 / m)?, inst.functions))
}

pub fn oneil(ctx: &Ctx) -> Result<Report, CliError> {
    let s = operator_setup(ctx)?;
    let per_decade: Option<usize> = ctx.params.parsed("grid-per-decade")?;
    ctx.params.require(per_decade.is_none_or(|k| k >= 1), "grid-per-decade", "must be positive")?;
    let grids = |op: &IntegralOperator| match per_decade {
        Some(k) => {
            let (mn, mm) = (op.codomain().total_mass(), op.domain().total_mass());
            (geometric(1e-3 * mn, mn, 3 * k), geometric(1e-3 * mm, mm, 3 * k))
        }
        None => oneil_grids(op, s.grid),
    };
    // (max violation of the sharp form, witness C, chained C, form with C holds)
    let rows: Vec<(f64, f64, f64, bool)> = (0..s.instances)
        .into_par_iter()
        .map(|i| {
            let (op, fs) = normalized_instance(ctx.seed, i, &s)?;
            let (tg, taug) = grids(&op);
            let v_sharp = fs
                .iter()
                .map(|f| verify_oneil_sharp(&op, f, &tg, &taug).map(|r| r.max_violation))
                .collect::<adams_core::Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            let power = verify_oneil_power(&op, &fs, &s.exps, &tg, &taug)?;
            Ok((v_sharp, power.c_witness, power.c_chain, power.holds))
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(&["instance", "max_violation_sharp", "c_witness", "c_chain", "holds_with_c"]);
    for (i, r) in rows.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend([r.0, r.1, r.2].iter().map(|v| adams_core::measure::fmt_num(*v)));
        row.push(r.3.to_string());
        table.rows.push(row);
    }
    let tol = ctx.tol.unwrap_or(0.10);
    let worst20 = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let half = (s.instances / 2).max(1);
    let witness = |n: usize| rows[..n].iter().map(|r| r.1).fold(0.0, f64::max);
    let (c_half, c_full) = (witness(half), witness(s.instances));
    let drift = (c_full - c_half).abs() / c_half.max(f64::MIN_POSITIVE);
    let failures19 = rows.iter().filter(|r| !r.3).count();
    let checks = vec![
        Check::pass_if(
            "sharp-form",
            worst20 <= adams_core::operator::SLACK,
            format!("max relative violation {worst20:e} over {} instances", s.instances),
        ),
        Check::pass_if("chained-constant", failures19 == 0, format!("{failures19} instances violate the chained C")),
        Check::pass_if(
            "witness-stability",
            s.instances >= 2 && drift <= tol,
            format!("C witness {c_half} on the first {half}, {c_full} on all; drift {drift:.4} vs {tol}"),
        ),
    ];
    let values = json!({
        "instances": s.instances,
        "p": num(s.exps.p),
        "q": num(s.exps.q),
        "max_violation_sharp": num(worst20),
        "c_witness_half": num(c_half),
        "c_witness": num(c_full),
        "c_witness_drift": num(drift),
        "max_c_chain": num(rows.iter().map(|r| r.2).fold(0.0, f64::max)),
    });
    Ok(finish(
        ctx,
        "(Tf)**(t) <= t max{k1**(t), k2**(t)} f**(t) + int_t^inf f* k1*; \
         (Tf)**(t) <= C max{tau^(-beta0/(q beta)), t^(-1/q)} int_0^tau f* u^(1/p-1) du + int_tau^inf f* k1*",
        values,
        checks,
        table,
    ))
}

pub fn weak_type(ctx: &Ctx) -> Result<Report, CliError> {
    let s = operator_setup(ctx)?;
    // (lhs, rhs, holds)
    let rows: Vec<(f64, f64, bool)> = (0..s.instances)
        .into_par_iter()
        .map(|i| {
            let (op, fs) = normalized_instance(ctx.seed, i, &s)?;
            let mut worst = (0.0, 1.0, true);
            for f in &fs {
                let tf = op.apply(f)?;
                let top = tf.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let grid = if top > 0.0 { geometric(1e-3 * top, top, s.grid) } else { vec![1.0, 2.0] };
                let r = verify_weak_type(&op, f, &s.exps, &grid)?;
                let all = worst.2 && r.holds;
                if r.lhs_max / r.rhs > worst.0 / worst.1 {
                    worst = (r.lhs_max, r.rhs, all);
                } else {
                    worst.2 = all;
                }
            }
            Ok(worst)
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(&["instance", "lhs", "rhs", "holds"]);
    for (i, r) in rows.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend([r.0, r.1].iter().map(|v| adams_core::measure::fmt_num(*v)));
        row.push(r.2.to_string());
        table.rows.push(row);
    }
    let failures = rows.iter().filter(|r| !r.2).count();
    let tightest = rows.iter().map(|r| r.0 / r.1).fold(0.0, f64::max);
    let checks = vec![Check::pass_if("weak-type", failures == 0, format!("{failures} violations; largest lhs/rhs {tightest:.4}"))];
    let values = json!({
        "instances": s.instances,
        "p": num(s.exps.p),
        "q": num(s.exps.q),
        "violations": failures,
        "max_lhs_over_rhs": num(tightest),
    });
    Ok(finish(ctx, "s m(Tf,s)^(1/q) <= q^2/(beta0 (q-p)) M^(1-1/p) B^(1/q) ||f||_p", values, checks, table))
}
