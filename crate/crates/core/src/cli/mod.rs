//! Config-driven runner behind the `crfolio` binary.
//!
//! ```text
//! crfolio <task> --config <path> [--out <dir>] [--seed <u64>]
//! crfolio list_catalog
//! ```
//!
//! Every run writes `report.json` with the fields `meta`, `config_echo`,
//! `evidence`, and, where applicable, `verdict` or `error`. Only `meta`
//! varies between identical runs. CSV dumps go next to it.
//!
//! Exit codes: 0 ok or expected outcome, 1 task error, 2 config error,
//! 3 `NONDEGENERATE_WITNESS`, 4 `INCONCLUSIVE`.
//!
//! `CRFOLIO_THREADS` caps the worker pool.

pub mod config;
pub mod tasks;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use config::{parse_config, ConfigError, RunConfig, Task};
pub use tasks::{execute, Outcome};

use crate::verify::Verdict;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TASK_ERROR: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub task: String,
    pub seed: u64,
    pub threads: usize,
    /// Seconds since the Unix epoch; the only time-dependent field.
    pub generated_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskError {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub config_echo: RunConfig,
    pub evidence: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<TaskError>,
}

impl Report {
    /// The report without `meta`, as compared for determinism.
    pub fn deterministic_part(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Value::Object(m) = &mut v {
            m.remove("meta");
        }
        serde_json::to_string(&v).expect("reports serialize")
    }
}

/// Runs `cfg` and assembles the report; never fails, errors land in it.
pub fn build_report(cfg: &RunConfig) -> (Report, Vec<(String, String)>, i32) {
    let meta = Meta {
        tool: "crfolio".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        task: cfg.task.name().into(),
        seed: cfg.seed,
        threads: rayon::current_num_threads(),
        generated_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    match execute(cfg) {
        Ok(out) => {
            let code = out.exit_code();
            let report = Report {
                meta,
                config_echo: cfg.clone(),
                evidence: out.evidence,
                verdict: out.verdict,
                error: out.failure.map(|message| TaskError {
                    kind: "expectation".into(),
                    message,
                }),
            };
            (report, out.csv, code)
        }
        Err(e) => {
            let report = Report {
                meta,
                config_echo: cfg.clone(),
                evidence: Value::Null,
                verdict: None,
                error: Some(TaskError {
                    kind: e.kind().into(),
                    message: e.to_string(),
                }),
            };
            (report, Vec::new(), EXIT_TASK_ERROR)
        }
    }
}

/// Result of [`run`]: exit code and the files written.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub exit_code: i32,
    pub report: Report,
    pub files: Vec<PathBuf>,
}

/// Runs `cfg` and writes `report.json` plus CSV dumps into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> std::io::Result<RunSummary> {
    let (report, csv, exit_code) = build_report(cfg);
    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    let path = out.join("report.json");
    let mut text = serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    files.push(path);
    if cfg.output.csv {
        for (name, contents) in csv {
            let p = out.join(name);
            fs::write(&p, contents)?;
            files.push(p);
        }
    }
    Ok(RunSummary {
        exit_code,
        report,
        files,
    })
}

/// Reads, parses and validates a config file; `Err` is the message to print.
pub fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Deserialize)]
struct CatalogEntry {
    kind: String,
    name: String,
    params: String,
    provenance: String,
}

/// Sorted listing of builtin families, functions and surfaces.
pub fn list_catalog() -> String {
    let mut entries: Vec<CatalogEntry> =
        serde_json::from_str(include_str!("catalog.json")).expect("embedded catalog is valid");
    entries.sort_by(|a, b| (&a.kind, &a.name).cmp(&(&b.kind, &b.name)));
    let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
    let pwidth = entries.iter().map(|e| e.params.len()).max().unwrap_or(0);
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!(
            "{:<8}  {:<width$}  {:<pwidth$}  {}\n",
            e.kind, e.name, e.params, e.provenance
        ));
    }
    out
}

/// Sizes the global worker pool from `CRFOLIO_THREADS`, if set.
pub fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("CRFOLIO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("CRFOLIO_THREADS must be a positive integer, got '{raw}'"))?;
    // a pool may already exist when embedded; the cap is then best effort
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_sorted_and_annotated() {
        let a = list_catalog();
        assert_eq!(a, list_catalog());
        let line = |name: &str| a.lines().find(|l| l.contains(name)).unwrap().to_string();
        assert!(line("rotating_circles").contains("§2.3"));
        assert!(line("hopf_discs").contains("§2.3 Hopf foliation"));
        let keys: Vec<(String, String)> = a
            .lines()
            .map(|l| {
                let mut it = l.split_whitespace();
                (it.next().unwrap().to_string(), it.next().unwrap().to_string())
            })
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
