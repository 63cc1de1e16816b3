use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    Rearrange,
    Oneil,
    WeakType,
    SharpConst,
    Parseval,
    SharpnessSweep,
    MoserNorms,
    GammaCounterexample,
    Garsia,
    DistributionAsymptotics,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Self::Rearrange,
        Self::Oneil,
        Self::WeakType,
        Self::SharpConst,
        Self::Parseval,
        Self::SharpnessSweep,
        Self::MoserNorms,
        Self::GammaCounterexample,
        Self::Garsia,
        Self::DistributionAsymptotics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rearrange => "rearrange",
            Self::Oneil => "oneil",
            Self::WeakType => "weak-type",
            Self::SharpConst => "sharp-const",
            Self::Parseval => "parseval",
            Self::SharpnessSweep => "sharpness-sweep",
            Self::MoserNorms => "moser-norms",
            Self::GammaCounterexample => "gamma-counterexample",
            Self::Garsia => "garsia",
            Self::DistributionAsymptotics => "distribution-asymptotics",
        }
    }

    /// Experiment-specific keys accepted in a config file or as flags.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Self::Rearrange => &["space", "values", "instances", "atoms"],
            Self::Oneil => &["instances", "atoms", "functions", "grid", "grid-per-decade", "beta", "beta0", "p"],
            Self::WeakType => &["instances", "atoms", "functions", "grid", "beta", "beta0", "p"],
            Self::SharpConst => &["family", "n", "d", "lambda", "matrix", "preset", "samples", "expected"],
            Self::Parseval => &["n", "d", "f", "g", "f-scale", "g-scale", "f-matrix", "g-matrix"],
            Self::SharpnessSweep => &["n", "d", "lambda", "alphas", "m-min", "m-max", "per-shell"],
            Self::MoserNorms => &["n", "d", "delta", "ell", "m-list"],
            Self::GammaCounterexample => &["n", "d", "r-list", "per-shell"],
            Self::Garsia => &["beta", "gamma", "H", "q", "y1", "family-size"],
            Self::DistributionAsymptotics => &["n", "d", "radius", "s-min", "s-max", "levels", "directions", "radial-cells"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment {s:?}; expected one of {}", Self::ALL.map(|e| e.name()).join(", ")))
    }
}

/// Keys valid in every config file besides the experiment-specific ones.
pub const GLOBAL_KEYS: [&str; 5] = ["experiment", "seed", "threads", "out-dir", "tol"];

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    File { path: PathBuf, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub origin: Origin,
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str, path: &Path) -> Result<Vec<(String, Entry)>, CliError> {
    let mut out: Vec<(String, Entry)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let origin = Origin::File { path: path.to_path_buf(), line };
        let Some((k, v)) = body.split_once('=') else {
            return Err(CliError::Config { origin, key: None, msg: format!("expected `key = value`, got {body:?}") });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Config { origin, key: None, msg: "empty key".into() });
        }
        if let Some((_, prev)) = out.iter().find(|(key, _)| key == k) {
            return Err(CliError::Config { origin, key: Some(k.into()), msg: format!("duplicate key (first set at {})", prev.origin) });
        }
        out.push((k.to_string(), Entry { value: v.to_string(), origin }));
    }
    Ok(out)
}

/// A validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: Params,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub tol: Option<f64>,
}

/// Global settings given on the command line.
#[derive(Debug, Clone, Default)]
pub struct GlobalOverrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub tol: Option<f64>,
}

impl ExperimentConfig {
    /// Merge a config file (if any) with flag values; flags win. `expected`
    /// is the subcommand's experiment, `None` for `run`.
    pub fn assemble(
        expected: Option<Experiment>,
        file: Option<&Path>,
        flags: Vec<(&'static str, Option<String>)>,
        globals: &GlobalOverrides,
    ) -> Result<Self, CliError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            entries.extend(parse_kv(&text, path)?);
        }
        let experiment = match (entries.remove("experiment"), expected) {
            (Some(e), want) => {
                let found: Experiment = e.value.parse().map_err(|msg| CliError::Config {
                    origin: e.origin.clone(),
                    key: Some("experiment".into()),
                    msg,
                })?;
                if let Some(w) = want.filter(|w| *w != found) {
                    return Err(CliError::Config {
                        origin: e.origin,
                        key: Some("experiment".into()),
                        msg: format!("config is for {found}, not {w}"),
                    });
                }
                found
            }
            (None, Some(w)) => w,
            (None, None) => {
                let path = file.map(Path::to_path_buf).unwrap_or_default();
                return Err(CliError::Config {
                    origin: Origin::File { path, line: 0 },
                    key: Some("experiment".into()),
                    msg: "missing `experiment` key".into(),
                });
            }
        };
        for (k, e) in &entries {
            if !GLOBAL_KEYS.contains(&k.as_str()) && !experiment.keys().contains(&k.as_str()) {
                return Err(CliError::Config {
                    origin: e.origin.clone(),
                    key: Some(k.clone()),
                    msg: format!("unknown key for {experiment}; accepted: {}", experiment.keys().join(", ")),
                });
            }
        }
        for (k, v) in flags {
            if let Some(v) = v {
                entries.insert(k.to_string(), Entry { value: v, origin: Origin::Flag });
            }
        }
        let mut params = Params { entries };
        let seed = match globals.seed {
            Some(s) => s,
            None => params.take_parsed("seed")?.unwrap_or(adams_core::montecarlo::DEFAULT_SEED),
        };
        let threads = match globals.threads {
            Some(t) => Some(t),
            None => params.take_parsed("threads")?,
        };
        if threads == Some(0) {
            return Err(CliError::Validation("threads must be at least 1".into()));
        }
        let out_dir = match &globals.out_dir {
            Some(p) => p.clone(),
            None => params.take_parsed::<String>("out-dir")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
        };
        let tol = match globals.tol {
            Some(t) => Some(t),
            None => params.take_parsed("tol")?,
        };
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Validation(format!("tol must be positive and finite, got {t}")));
            }
        }
        Ok(Self { experiment, params, seed, threads, out_dir, tol })
    }
}

/// Experiment parameters with typed, diagnosed access.
#[derive(Debug, Clone, Default)]
pub struct Params {
    entries: BTreeMap<String, Entry>,
}

impl Params {
    #[cfg(test)]
    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        let entries = pairs
            .iter()
            .map(|(k, v)| (k.to_string(), Entry { value: v.to_string(), origin: Origin::Flag }))
            .collect();
        Self { entries }
    }

    fn take_parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        let v = self.parsed(key)?;
        self.entries.remove(key);
        Ok(v)
    }

    /// A diagnostic naming `key` and where it was set.
    pub fn error(&self, key: &str, msg: impl Into<String>) -> CliError {
        let msg = msg.into();
        let origin = self.entries.get(key).map_or(Origin::Flag, |e| e.origin.clone());
        CliError::Config { origin, key: Some(key.into()), msg }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.error(key, format!("cannot parse {v:?} as {}", std::any::type_name::<T>()))),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|_| self.error(key, format!("cannot parse list item {s:?}"))))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    /// Row-major `n×n` matrix given as `a11 a12; a21 a22`.
    pub fn matrix(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>, CliError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let rows: Vec<Vec<f64>> = v
            .split(';')
            .map(|r| {
                r.split_whitespace()
                    .map(|s| s.parse::<f64>().map_err(|_| self.error(key, format!("cannot parse matrix entry {s:?}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
            return Err(self.error(key, "matrix must be square, rows separated by ';'"));
        }
        Ok(Some(rows))
    }

    /// Fail with a diagnostic naming `key` unless `ok`.
    pub fn require(&self, ok: bool, key: &str, msg: impl Into<String>) -> Result<(), CliError> {
        if ok {
            Ok(())
        } else {
            Err(self.error(key, msg.into()))
        }
    }

    /// Effective parameters as strings, for the report.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.value.clone())).collect()
    }
}
