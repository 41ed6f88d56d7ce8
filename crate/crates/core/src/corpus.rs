//! The bundled benchmark programs: faulty variants of small integer
//! routines, each with a counterexample and a sidecar describing the
//! injected faults and their fixes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::localize::{ce_from_json, CounterExample};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{name}: {source}")]
    Json {
        name: String,
        source: serde_json::Error,
    },
    #[error("{name}: fix for line {line} does not match the source")]
    BadFix { name: String, line: u32 },
    #[error("{0}: io error: {1}")]
    Io(String, std::io::Error),
}

/// Sidecar metadata of a benchmark program.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
pub struct Labels {
    /// Lines carrying an injected fault.
    pub faults: Vec<u32>,
    /// Replacement text for each faulty line.
    pub fix: BTreeMap<u32, String>,
    /// Line numbers of this encoding mapped to those of the reference table.
    pub labels: BTreeMap<u32, u32>,
    #[serde(default)]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub name: String,
    pub source: String,
    pub ce_json: String,
    pub labels_json: String,
}

impl Entry {
    pub fn counterexample(&self) -> Result<CounterExample, CorpusError> {
        ce_from_json(&self.ce_json).map_err(|source| CorpusError::Json {
            name: self.name.clone(),
            source,
        })
    }

    pub fn labels(&self) -> Result<Labels, CorpusError> {
        serde_json::from_str(&self.labels_json).map_err(|source| CorpusError::Json {
            name: self.name.clone(),
            source,
        })
    }

    /// The program with every faulty line replaced by its fix.
    pub fn fixed_source(&self) -> Result<String, CorpusError> {
        let labels = self.labels()?;
        let mut lines: Vec<String> = self.source.lines().map(str::to_string).collect();
        for (&line, text) in &labels.fix {
            let slot = lines
                .get_mut(line as usize - 1)
                .filter(|l| !l.trim().is_empty())
                .ok_or_else(|| CorpusError::BadFix {
                    name: self.name.clone(),
                    line,
                })?;
            let indent: String = slot.chars().take_while(|c| c.is_whitespace()).collect();
            *slot = format!("{indent}{text}");
        }
        let mut out = lines.join("\n");
        out.push('\n');
        Ok(out)
    }
}

macro_rules! embed {
    ($name:literal) => {
        (
            $name,
            include_str!(concat!("../corpus/", $name, ".imp")),
            include_str!(concat!("../corpus/", $name, ".ce.json")),
            include_str!(concat!("../corpus/", $name, ".labels.json")),
        )
    };
}

const EMBEDDED: &[(&str, &str, &str, &str)] = &[
    embed!("AbsMinusKO"),
    embed!("AbsMinusKO2"),
    embed!("AbsMinusKO3"),
    embed!("MinmaxKO"),
    embed!("MidKO"),
    embed!("Maxmin6varKO"),
    embed!("Maxmin6varKO2"),
    embed!("Maxmin6varKO3"),
    embed!("Maxmin6varKO4"),
    embed!("TritypeKO"),
    embed!("TritypeKO2"),
    embed!("TritypeKO2V2"),
    embed!("TritypeKO3"),
    embed!("TritypeKO4"),
    embed!("TritypeKO5"),
    embed!("TritypeKO6"),
    embed!("TriPerimetreKO"),
    embed!("TriPerimetreKOV2"),
];

/// The embedded corpus, in a fixed order.
pub fn programs() -> Vec<Entry> {
    EMBEDDED
        .iter()
        .map(|(name, source, ce, labels)| Entry {
            name: name.to_string(),
            source: source.to_string(),
            ce_json: ce.to_string(),
            labels_json: labels.to_string(),
        })
        .collect()
}

pub fn get(name: &str) -> Option<Entry> {
    programs().into_iter().find(|e| e.name == name)
}

/// Loads every `NAME.imp` in `dir` together with `NAME.ce.json` and
/// `NAME.labels.json` (the latter may be absent). Sorted by name.
pub fn load_dir(dir: &Path) -> Result<Vec<Entry>, CorpusError> {
    let io = |p: &Path, e| CorpusError::Io(p.display().to_string(), e);
    let mut out = Vec::new();
    for item in fs::read_dir(dir).map_err(|e| io(dir, e))? {
        let path = item.map_err(|e| io(dir, e))?.path();
        if path.extension().and_then(|x| x.to_str()) != Some("imp") {
            continue;
        }
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let read = |suffix: &str| {
            let p = dir.join(format!("{name}{suffix}"));
            fs::read_to_string(&p).map_err(|e| io(&p, e))
        };
        let labels_json = read(".labels.json").unwrap_or_else(|_| "{\"faults\":[],\"fix\":{},\"labels\":{}}".to_string());
        out.push(Entry {
            source: read(".imp")?,
            ce_json: read(".ce.json")?,
            labels_json,
            name,
        });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    #[test]
    fn every_program_parses_with_its_sidecars() {
        let all = programs();
        assert_eq!(all.len(), 18);
        for e in &all {
            let p = parse(&e.source).unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert_eq!(p.name, e.name);
            let ce = e.counterexample().unwrap();
            assert_eq!(ce.keys().cloned().collect::<Vec<_>>(), {
                let mut i = p.inputs.clone();
                i.sort();
                i
            });
            let labels = e.labels().unwrap();
            assert!(!labels.faults.is_empty());
            let fixed = parse(&e.fixed_source().unwrap()).unwrap();
            assert_ne!(fixed, p);
        }
    }

    #[test]
    fn on_disk_corpus_matches_embedded() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
        assert_eq!(load_dir(&dir).unwrap().len(), programs().len());
    }

    #[test]
    fn absminus_statement_counts() {
        use crate::lang::StmtKind;
        let p = parse(&get("AbsMinusKO").unwrap().source).unwrap();
        assert_eq!(p.count(|k| matches!(k, StmtKind::IfElse { .. })), 2);
        assert_eq!(p.count(|k| matches!(k, StmtKind::Assign { .. })), 4);
    }
}
