mod cli;
mod config;
mod error;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use cli::{Cli, Command};
use config::{ExperimentConfig, GlobalOverrides};
use error::CliError;
use output::{round_numbers, write_atomic, Verdict};

const EXIT_CONFIG: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let globals = GlobalOverrides {
        seed: cli.global.seed,
        threads: cli.global.threads,
        out_dir: cli.global.out_dir.clone(),
        tol: cli.global.tol,
    };
    let result = match &cli.command {
        Command::Run { config } => ExperimentConfig::assemble(None, Some(config), vec![], &globals).and_then(|c| run_one(&c)),
        Command::Regress { manifest } => regress(manifest, &globals),
        cmd => {
            let (exp, file, flags) = cmd.experiment().expect("experiment subcommand");
            ExperimentConfig::assemble(Some(exp), file.as_deref(), flags, &globals).and_then(|c| run_one(&c))
        }
    };
    match result {
        Ok(v) => ExitCode::from(v.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn run_one(cfg: &ExperimentConfig) -> Result<Verdict, CliError> {
    let report = experiments::run(cfg)?;
    let (json_path, _) = report.write(&cfg.out_dir)?;
    for c in &report.checks {
        println!("{:<13} {:<24} {}", format!("{:?}", c.verdict).to_uppercase(), c.name, c.detail);
    }
    let verdict = report.verdict();
    println!("{}: {} ({})", report.experiment, format!("{verdict:?}").to_uppercase(), json_path.display());
    Ok(verdict)
}

/// Config paths, one per line, relative to the manifest's directory.
fn read_manifest(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| base.join(l))
        .collect())
}

/// Run every manifest entry into `<out>/<config stem>/`; failures are
/// recorded and the run continues.
fn regress(manifest: &Path, globals: &GlobalOverrides) -> Result<Verdict, CliError> {
    let entries = read_manifest(manifest)?;
    let out_dir = globals.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut overall = Verdict::Pass;
    let mut rows = Vec::new();
    for path in &entries {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("entry").to_string();
        let mut g = globals.clone();
        g.out_dir = Some(out_dir.join(&stem));
        let outcome = ExperimentConfig::assemble(None, Some(path), vec![], &g).and_then(|cfg| {
            let report = experiments::run(&cfg)?;
            report.write(&cfg.out_dir)?;
            Ok(report)
        });
        let row = match outcome {
            Ok(report) => {
                let v = report.verdict();
                overall = overall.combine(v);
                println!("{:<13} {stem}", format!("{v:?}").to_uppercase());
                json!({
                    "config": path.display().to_string(),
                    "experiment": report.experiment.name(),
                    "formula_ref": report.formula_ref,
                    "verdict": v,
                    "checks": report.checks,
                    "values": report.values,
                })
            }
            Err(e) => {
                overall = overall.combine(Verdict::Fail);
                println!("{:<13} {stem}: {e}", "ERROR");
                json!({"config": path.display().to_string(), "verdict": Verdict::Fail, "error": e.to_string()})
            }
        };
        rows.push(row);
    }
    let mut summary = json!({
        "experiment": "regress",
        "manifest": manifest.display().to_string(),
        "entries": rows,
        "verdict": overall,
        "seed": globals.seed,
        "tool_version": env!("CARGO_PKG_VERSION"),
    });
    round_numbers(&mut summary);
    std::fs::create_dir_all(&out_dir)?;
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(&out_dir.join("regress.json"), text.as_bytes())?;
    println!("regress: {} ({} entries)", format!("{overall:?}").to_uppercase(), entries.len());
    Ok(overall)
}
