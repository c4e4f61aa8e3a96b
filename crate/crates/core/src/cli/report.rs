use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub experiment: String,
    pub config_digest: String,
    pub verdicts: Vec<Verdict>,
    pub results: Map<String, Value>,
    /// Seconds, total and per stage; the only field that differs between identical runs.
    pub wall_clock: Map<String, Value>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failed(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.pass).collect()
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }
}

/// Accumulates verdicts, numeric results and table artifacts for one run.
#[derive(Debug)]
pub struct Report {
    pub verdicts: Vec<Verdict>,
    pub results: Map<String, Value>,
    pub tables: Vec<Table>,
    /// Standalone JSON files, written as `<name>.json`.
    pub documents: Vec<(String, Value)>,
    /// Stage being executed, named in numerical-failure diagnostics.
    pub stage: String,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Also written as gnuplot data when plot output is requested.
    pub plot: bool,
}

impl Default for Report {
    fn default() -> Self {
        Self::new()
    }
}

impl Report {
    pub fn new() -> Self {
        Report { verdicts: vec![], results: Map::new(), tables: vec![], documents: vec![], stage: "setup".into() }
    }

    pub fn stage(&mut self, name: &str) {
        self.stage = name.to_string();
    }

    /// Passes when value ≤ tolerance.
    pub fn below(&mut self, check: &str, value: f64, tolerance: f64) {
        self.verdicts.push(Verdict { check: check.into(), pass: value <= tolerance, value, tolerance });
    }

    pub fn flag(&mut self, check: &str, pass: bool, value: f64, tolerance: f64) {
        self.verdicts.push(Verdict { check: check.into(), pass, value, tolerance });
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(value).expect("result serializes"));
    }

    pub fn document(&mut self, name: &str, value: impl Serialize) {
        self.documents.push((name.into(), serde_json::to_value(value).expect("document serializes")));
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<f64>>, plot: bool) {
        self.tables.push(Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows, plot });
    }
}

fn io(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("cannot write {}: {e}", path.display()))
}

pub fn summary_json(summary: &RunSummary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes")
}

/// Everything a run writes to disk.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub tables: Vec<Table>,
    pub documents: Vec<(String, Value)>,
}

/// Writes summary.json, one CSV per table, the JSON documents and, optionally, gnuplot .dat files.
/// Every file carries the config digest.
pub fn write_artifacts(dir: &Path, out: &RunOutput, plot: bool) -> Result<Vec<PathBuf>> {
    let (summary, tables) = (&out.summary, &out.tables);
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = vec![];
    for (name, value) in &out.documents {
        let path = dir.join(format!("{name}.json"));
        let doc = serde_json::json!({ "config_digest": summary.config_digest, name.as_str(): value });
        fs::write(&path, serde_json::to_string_pretty(&doc).expect("document serializes") + "\n").map_err(|e| io(&path, e))?;
        written.push(path);
    }
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        let mut f = fs::File::create(&path).map_err(|e| io(&path, e))?;
        let mut text = format!("# config_digest={}\n{}\n", summary.config_digest, t.columns.join(","));
        for r in &t.rows {
            text.push_str(&r.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(","));
            text.push('\n');
        }
        f.write_all(text.as_bytes()).map_err(|e| io(&path, e))?;
        written.push(path);
        if plot && t.plot {
            let path = dir.join(format!("{}.dat", t.name));
            let mut text = format!("# config_digest={}\n# {}\n", summary.config_digest, t.columns.join(" "));
            for r in &t.rows {
                text.push_str(&r.iter().map(|x| format!("{x:.12e}")).collect::<Vec<_>>().join(" "));
                text.push('\n');
            }
            fs::write(&path, text).map_err(|e| io(&path, e))?;
            written.push(path);
        }
    }
    let path = dir.join("summary.json");
    fs::write(&path, summary_json(summary) + "\n").map_err(|e| io(&path, e))?;
    written.push(path);
    Ok(written)
}
