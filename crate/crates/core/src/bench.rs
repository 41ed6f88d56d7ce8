//! Runs the localizer over a corpus for several deviation bounds and
//! compares the timing-free results with stored fixtures.

use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

use crate::corpus::{CorpusError, Entry};
use crate::lang::{parse, unroll, ParseError};
use crate::localize::{locfaults, LocConfig, LocError, McsReport};
use crate::report::{strip_timings, to_value};

pub const K_VALUES: [usize; 4] = [0, 1, 2, 3];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub k_values: Vec<usize>,
    pub mcs_bound: usize,
    pub unroll: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            k_values: K_VALUES.to_vec(),
            mcs_bound: 3,
            unroll: 10,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{0}: {1}")]
    Parse(String, ParseError),
    #[error("{0}: {1}")]
    Localize(String, LocError),
    #[error("{0}: result differs from fixture {1}")]
    FixtureMismatch(String, PathBuf),
    #[error("{0}: io error: {1}")]
    Io(String, std::io::Error),
    #[error("{0}: bad fixture: {1}")]
    BadFixture(String, serde_json::Error),
}

/// Results of one program for every requested bound.
#[derive(Clone, Debug)]
pub struct ProgramRun {
    pub name: String,
    pub runs: Vec<(usize, McsReport<i64>)>,
}

impl ProgramRun {
    /// `{"program": .., "runs": [{"k": .., "report": ..}]}`.
    pub fn to_value(&self) -> Value {
        let runs: Vec<Value> = self
            .runs
            .iter()
            .map(|(k, r)| json!({"k": k, "report": to_value(r)}))
            .collect();
        json!({"program": self.name, "runs": runs})
    }

    pub fn fixture_value(&self) -> Value {
        let mut v = self.to_value();
        strip_timings(&mut v);
        v
    }

    pub fn total_time(&self, k: usize) -> Option<Duration> {
        self.runs
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|(_, r)| r.timings.preprocess + r.timings.localize)
    }
}

pub fn run_entry(entry: &Entry, config: &BenchConfig) -> Result<ProgramRun, BenchError> {
    let program = parse(&entry.source).map_err(|e| BenchError::Parse(entry.name.clone(), e))?;
    let program = unroll(&program, config.unroll);
    let ce = entry.counterexample()?;
    let mut runs = Vec::new();
    for &k in &config.k_values {
        let loc = LocConfig {
            k_max: k,
            mcs_bound: config.mcs_bound,
            ..LocConfig::default()
        };
        let report = locfaults(&program, &ce, &loc).map_err(|e| BenchError::Localize(entry.name.clone(), e))?;
        runs.push((k, report));
    }
    Ok(ProgramRun {
        name: entry.name.clone(),
        runs,
    })
}

pub fn fixture_path(fixtures: &Path, name: &str) -> PathBuf {
    fixtures.join(format!("{name}.json"))
}

/// Compares a run with its stored fixture, or overwrites the fixture when
/// `update` is set.
pub fn check_fixture(run: &ProgramRun, fixtures: &Path, update: bool) -> Result<(), BenchError> {
    let path = fixture_path(fixtures, &run.name);
    let io = |e| BenchError::Io(path.display().to_string(), e);
    let got = run.fixture_value();
    if update {
        fs::create_dir_all(fixtures).map_err(io)?;
        let mut text = serde_json::to_string_pretty(&got).expect("JSON values always serialize");
        text.push('\n');
        return fs::write(&path, text).map_err(io);
    }
    let text = fs::read_to_string(&path).map_err(io)?;
    let want: Value = serde_json::from_str(&text).map_err(|e| BenchError::BadFixture(run.name.clone(), e))?;
    if got != want {
        return Err(BenchError::FixtureMismatch(run.name.clone(), path));
    }
    Ok(())
}

fn cell(run: &ProgramRun, k: usize) -> String {
    let Some((_, r)) = run.runs.iter().find(|(kk, _)| *kk == k) else {
        return "-".into();
    };
    let mut sets: Vec<String> = Vec::new();
    for e in &r.entries {
        let mcs: Vec<String> = e
            .mcs
            .iter()
            .map(|m| format!("{{{}}}", m.lines.iter().map(u32::to_string).collect::<Vec<_>>().join(",")))
            .collect();
        if e.deviations.is_empty() {
            sets.push(mcs.join(""));
        } else {
            let dev: Vec<String> = e.deviations.iter().map(|l| format!("*{l}")).collect();
            sets.push(format!("{{{}}}:{}", dev.join(","), if mcs.is_empty() { "-".into() } else { mcs.join("") }));
        }
    }
    sets.join(" ")
}

/// Human-readable table: one block per program, one line per bound.
pub fn summary_table(runs: &[ProgramRun]) -> String {
    let mut out = String::new();
    writeln!(out, "{:<18} {:>2} {:>10}  entries", "program", "k", "time_ms").unwrap();
    for run in runs {
        for (k, _) in &run.runs {
            let ms = run.total_time(*k).map(|d| d.as_secs_f64() * 1e3).unwrap_or(0.0);
            writeln!(out, "{:<18} {:>2} {:>10.3}  {}", run.name, k, ms, cell(run, *k)).unwrap();
        }
    }
    out
}
