use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::failure::Failure;
use crate::Context;

/// Output files held in memory until the run has succeeded.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new() -> Self {
        Artifacts::default()
    }

    pub fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body.into_bytes()));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut body = Artifacts::json_bytes(value)?;
        body.push(b'\n');
        self.files.push((name.to_string(), body));
        Ok(())
    }

    pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
        serde_json::to_vec_pretty(value).map_err(|e| Failure::internal(format!("serializing report: {e}")))
    }

    pub fn write(&self, out: &Path) -> Result<(), Failure> {
        std::fs::create_dir_all(out).map_err(|e| Failure::internal(format!("{}: {e}", out.display())))?;
        for (name, body) in &self.files {
            write_file(&out.join(name), body)?;
        }
        Ok(())
    }
}

pub fn write_file(path: &Path, body: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| Failure::internal(format!("{}: {e}", path.display())))
}

/// Full round-trip precision for CSV cells.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Builds a CSV body from a header and rows of numbers.
pub fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// One pass/fail threshold test reported alongside the results.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    /// `"<"` or `">="`.
    pub comparison: &'static str,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            value,
            threshold,
            comparison: "<",
            passed: value < threshold,
        }
    }

    pub fn at_least(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            value,
            threshold,
            comparison: ">=",
            passed: value >= threshold,
        }
    }
}

/// Resolved run options, echoed so a report can be reproduced.
#[derive(Debug, Serialize)]
struct Options<'a> {
    grid: Option<crate::input::GridSpec>,
    seed: u64,
    tol: Option<f64>,
    precision: mixedmop::Precision,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<&'a Value>,
}

#[derive(Debug, Serialize)]
struct Report<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a Option<Value>,
    options: Options<'a>,
    passed: bool,
    checks: &'a [Check],
    results: &'a R,
}

/// Adds the command's report and fails with exit status 2 if any check missed.
pub fn finish<R: Serialize>(
    mut artifacts: Artifacts,
    name: &str,
    ctx: &Context,
    grid: Option<crate::input::GridSpec>,
    extra: Option<&Value>,
    checks: &[Check],
    results: &R,
) -> Result<Artifacts, Failure> {
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        tool: "mixedmop",
        version: mixedmop::VERSION,
        command: ctx.command,
        config: &ctx.config,
        options: Options {
            grid,
            seed: ctx.seed,
            tol: ctx.tol,
            precision: ctx.precision,
            extra,
        },
        passed,
        checks,
        results,
    };
    if !passed {
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} = {:e} (needs {} {:e})", c.name, c.value, c.comparison, c.threshold))
            .collect();
        let details = serde_json::to_value(&report).map_err(|e| Failure::internal(e.to_string()))?;
        return Err(Failure::accuracy(format!("check failed: {}", failed.join("; ")), details));
    }
    artifacts.json(name, &report)?;
    Ok(artifacts)
}
