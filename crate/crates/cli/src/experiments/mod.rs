//! One function per experiment: validate parameters, compute, and fold the
//! results into a [`Report`].

mod extremal;
mod garsia;
mod operator;
mod symbol;

use serde_json::Value;

use crate::config::{Experiment, ExperimentConfig, Params};
use crate::error::CliError;
use crate::output::{Check, Report, Table};

pub struct Ctx<'a> {
    pub params: &'a Params,
    pub seed: u64,
    pub tol: Option<f64>,
    experiment: Experiment,
}

pub(crate) fn finish(ctx: &Ctx, formula_ref: &str, values: Value, checks: Vec<Check>, table: Table) -> Report {
    Report {
        experiment: ctx.experiment,
        formula_ref: formula_ref.to_string(),
        values,
        checks,
        table,
        seed: ctx.seed,
        parameters: ctx.params.snapshot(),
    }
}

pub(crate) fn geometric(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    adams_core::quadrature::geometric_grid(lo, hi, count)
}

/// Run the configured experiment inside a pool of `threads` workers.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let ctx = Ctx { params: &cfg.params, seed: cfg.seed, tol: cfg.tol, experiment: cfg.experiment };
    let body = || match cfg.experiment {
        Experiment::Rearrange => operator::rearrange_exp(&ctx),
        Experiment::Oneil => operator::oneil(&ctx),
        Experiment::WeakType => operator::weak_type(&ctx),
        Experiment::SharpConst => symbol::sharp_const(&ctx),
        Experiment::Parseval => symbol::parseval(&ctx),
        Experiment::DistributionAsymptotics => symbol::distribution_asymptotics_exp(&ctx),
        Experiment::SharpnessSweep => extremal::sharpness_sweep_exp(&ctx),
        Experiment::MoserNorms => extremal::moser_norms(&ctx),
        Experiment::GammaCounterexample => extremal::gamma_counterexample(&ctx),
        Experiment::Garsia => garsia::garsia(&ctx),
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Validation(format!("cannot start {t} threads: {e}")))?
            .install(body),
        None => body(),
    }
}
