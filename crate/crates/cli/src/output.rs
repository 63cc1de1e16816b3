use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use adams_core::measure::fmt_num;
use serde::Serialize;
use serde_json::Value;

use crate::config::Experiment;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
            Verdict::Inconclusive => 3,
        }
    }

    /// FAIL dominates INCONCLUSIVE, which dominates PASS.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn of(pass: bool) -> Verdict {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One named check inside an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, verdict: Verdict, detail: impl Into<String>) -> Self {
        Self { name: name.into(), verdict, detail: detail.into() }
    }

    pub fn pass_if(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self::new(name, Verdict::of(ok), detail)
    }
}

/// Column data for the CSV file; cells are preformatted.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| fmt_num(*v)).collect());
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: Experiment,
    pub formula_ref: String,
    pub values: Value,
    pub checks: Vec<Check>,
    pub table: Table,
    pub seed: u64,
    pub parameters: BTreeMap<String, String>,
}

impl Report {
    pub fn verdict(&self) -> Verdict {
        self.checks.iter().fold(Verdict::Pass, |v, c| v.combine(c.verdict))
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::json!({
            "experiment": self.experiment.name(),
            "formula_ref": self.formula_ref,
            "parameters": self.parameters,
            "values": self.values,
            "checks": self.checks,
            "verdict": self.verdict(),
            "seed": self.seed,
            "tool_version": env!("CARGO_PKG_VERSION"),
        });
        round_numbers(&mut v);
        v
    }

    /// `<out>/<experiment>.json` and `<out>/<experiment>.csv`.
    pub fn write(&self, out_dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
        std::fs::create_dir_all(out_dir)?;
        let json_path = out_dir.join(format!("{}.json", self.experiment.name()));
        let csv_path = out_dir.join(format!("{}.csv", self.experiment.name()));
        let mut text = serde_json::to_string_pretty(&self.to_json()).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        write_atomic(&json_path, text.as_bytes())?;
        write_atomic(&csv_path, &table_csv(&self.table)?)?;
        Ok((json_path, csv_path))
    }
}

pub fn table_csv(t: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&t.header).map_err(io)?;
    for r in &t.rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Write to a sibling temporary file, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Round every float to 15 significant digits; non-finite values become
/// the strings `inf`, `-inf`, `NaN`.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => {
            if let Some(x) = n.as_f64() {
                *v = num(x);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_numbers),
        Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// A float as a JSON value at 15 significant digits.
pub fn num(x: f64) -> Value {
    let s = fmt_num(x);
    match s.parse::<f64>().ok().filter(|y| y.is_finite()).and_then(serde_json::Number::from_f64) {
        Some(n) => Value::Number(n),
        None => Value::String(s),
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_fifteen_digits() {
        let mut v = serde_json::json!({"a": 0.1 + 0.2, "b": [1, 2.5], "c": "x"});
        round_numbers(&mut v);
        assert_eq!(v["a"], serde_json::json!(0.3));
        assert_eq!(v["b"], serde_json::json!([1, 2.5]));
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn verdict_combination() {
        use Verdict::*;
        assert_eq!(Pass.combine(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.combine(Fail), Fail);
        assert_eq!(Pass.combine(Pass), Pass);
        assert_eq!(Fail.exit_code(), 2);
    }
}
