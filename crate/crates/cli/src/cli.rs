use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Experiment;

#[derive(Parser, Debug)]
#[command(name = "adams", version, about = "Sharp Adams-type constants, rearrangement checks and extremal sweeps")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the experiment.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory receiving `<experiment>.json` and `<experiment>.csv`.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Override the experiment's primary tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

/// Declares a flag struct whose fields map one-to-one onto config keys.
macro_rules! flags {
    ($name:ident { $($field:ident => $key:literal : $help:literal),* $(,)? }) => {
        #[derive(Args, Debug, Clone, Default)]
        pub struct $name {
            /// Key-value config file; flags override its entries.
            #[arg(long)]
            pub config: Option<PathBuf>,
            $(
                #[arg(long = $key, help = $help, allow_hyphen_values = true)]
                pub $field: Option<String>,
            )*
        }

        impl $name {
            pub fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
                vec![$(($key, self.$field.clone())),*]
            }
        }
    };
}

flags!(RearrangeFlags {
    space => "space": "CSV file with id,weight[,x1..] rows",
    values => "values": "Comma-separated function values, one per point of --space",
    instances => "instances": "Random instances when no space is given",
    atoms => "atoms": "Atoms per random instance",
});

flags!(OneilFlags {
    instances => "instances": "Random instances",
    atoms => "atoms": "Atoms per instance",
    functions => "functions": "Test functions per instance",
    grid => "grid": "Points per axis of the geometric (t, tau) grid",
    grid_per_decade => "grid-per-decade": "Use this many grid points per decade instead of --grid",
    beta => "beta": "Exponent beta of k1*",
    beta0 => "beta0": "Exponent beta0 of k2*",
    p => "p": "Lebesgue exponent p (default: middle of the admissible interval)",
});

flags!(WeakTypeFlags {
    instances => "instances": "Random instances",
    atoms => "atoms": "Atoms per instance",
    functions => "functions": "Test functions per instance",
    grid => "grid": "Levels s probed per function",
    beta => "beta": "Exponent beta of k1*",
    beta0 => "beta0": "Exponent beta0 of k2*",
    p => "p": "Lebesgue exponent p",
});

flags!(SharpConstFlags {
    family => "family": "riesz, second-order, first-order, elliptic-p2 or vector-p2",
    n => "n": "Dimension",
    d => "d": "Order, 0 < d < n",
    lambda => "lambda": "Trace order of the measure, 0 < lambda <= n",
    matrix => "matrix": "Coefficient matrix, rows separated by ';'",
    preset => "preset": "r4-P1, r4-P2 or r4-P3 for vector-p2",
    samples => "samples": "Monte Carlo samples",
    expected => "expected": "Compare the constant against this value",
});

flags!(ParsevalFlags {
    n => "n": "Dimension",
    d => "d": "Homogeneity, 0 < d < n",
    f => "f": "constant or quadratic",
    g => "g": "constant or quadratic",
    f_scale => "f-scale": "Scale of f",
    g_scale => "g-scale": "Scale of g",
    f_matrix => "f-matrix": "SPD matrix of f, rows separated by ';'",
    g_matrix => "g-matrix": "SPD matrix of g, rows separated by ';'",
});

flags!(SweepFlags {
    n => "n": "Dimension (1 or 2)",
    d => "d": "Order, 0 < d < n",
    lambda => "lambda": "Trace order of the target measure",
    alphas => "alphas": "Comma-separated exponents alpha",
    m_min => "m-min": "First m",
    m_max => "m-max": "Last m",
    per_shell => "per-shell": "Mesh cells per dyadic shell",
});

flags!(MoserFlags {
    n => "n": "Dimension",
    d => "d": "Integer order, 0 < d < n",
    delta => "delta": "Transition width in log(1/|y|)",
    ell => "ell": "Spline smoothing order, at least d",
    m_list => "m-list": "Comma-separated m with r_m = 2^-m",
});

flags!(GammaFlags {
    n => "n": "Dimension (1)",
    d => "d": "Order, 0 < d < n",
    r_list => "r-list": "Comma-separated radii 2^-k",
    per_shell => "per-shell": "Mesh cells per dyadic shell",
});

flags!(GarsiaFlags {
    beta => "beta": "Exponent beta > 1",
    gamma => "gamma": "Weight decay gamma > 1",
    h => "H": "Perturbation size H >= 0",
    q => "q": "Decay length q > 0",
    y1 => "y1": "Left end of the support",
    family_size => "family-size": "Random phi in the base family (doubled for stability)",
});

flags!(AsymptoticsFlags {
    n => "n": "Dimension",
    d => "d": "Order, 0 < d < n",
    radius => "radius": "Radius of the ball",
    s_min => "s-min": "Smallest level",
    s_max => "s-max": "Largest level",
    levels => "levels": "Number of geometric levels",
    directions => "directions": "Sphere directions per level set",
    radial_cells => "radial-cells": "Radial cells per direction",
});

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the experiment named by a config file's `experiment` key.
    Run { config: PathBuf },
    /// Run every config listed in a manifest and write regress.json.
    Regress { manifest: PathBuf },
    /// Rearrangement engine against brute-force oracles.
    Rearrange(RearrangeFlags),
    /// Improved O'Neil inequality on random finite operators.
    Oneil(OneilFlags),
    /// Weak-type bound with its explicit constant.
    WeakType(WeakTypeFlags),
    /// Sharp exponential constant for a kernel or operator family.
    SharpConst(SharpConstFlags),
    /// Spherical Parseval identity.
    Parseval(ParsevalFlags),
    /// Exponential integrals of the extremal family across alpha.
    SharpnessSweep(SweepFlags),
    /// Norm growth of the Moser sequence.
    MoserNorms(MoserFlags),
    /// Logarithmically perturbed kernel counterexample.
    GammaCounterexample(GammaFlags),
    /// One-dimensional Adams-Garsia functional.
    Garsia(GarsiaFlags),
    /// Level-set asymptotics of the Riesz kernel.
    DistributionAsymptotics(AsymptoticsFlags),
}

impl Command {
    /// Experiment, config file and flag values of an experiment subcommand.
    pub fn experiment(&self) -> Option<(Experiment, Option<PathBuf>, Vec<(&'static str, Option<String>)>)> {
        let (e, cfg, pairs) = match self {
            Command::Run { .. } | Command::Regress { .. } => return None,
            Command::Rearrange(f) => (Experiment::Rearrange, &f.config, f.pairs()),
            Command::Oneil(f) => (Experiment::Oneil, &f.config, f.pairs()),
            Command::WeakType(f) => (Experiment::WeakType, &f.config, f.pairs()),
            Command::SharpConst(f) => (Experiment::SharpConst, &f.config, f.pairs()),
            Command::Parseval(f) => (Experiment::Parseval, &f.config, f.pairs()),
            Command::SharpnessSweep(f) => (Experiment::SharpnessSweep, &f.config, f.pairs()),
            Command::MoserNorms(f) => (Experiment::MoserNorms, &f.config, f.pairs()),
            Command::GammaCounterexample(f) => (Experiment::GammaCounterexample, &f.config, f.pairs()),
            Command::Garsia(f) => (Experiment::Garsia, &f.config, f.pairs()),
            Command::DistributionAsymptotics(f) => (Experiment::DistributionAsymptotics, &f.config, f.pairs()),
        };
        Some((e, cfg.clone(), pairs))
    }
}
