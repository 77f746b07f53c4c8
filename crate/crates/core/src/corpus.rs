//! The bundled benchmark modules, their manifest and the syntax-error cases.

use std::fs;
use std::path::{Path, PathBuf};

use crate::lang::{LineNo, SourceModule, EXTENSION};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

/// One manifest row with hand-counted structure.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub module: String,
    pub predicates: usize,
    pub lines: usize,
    /// Best branch coverage any test suite can reach.
    pub max_branch_coverage: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusManifest {
    pub entries: Vec<CorpusEntry>,
}

impl CorpusManifest {
    pub fn entry(&self, module: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.module == module)
    }
}

/// `corpus/` at the workspace root.
pub fn default_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn sources_in(dir: &Path) -> Result<Vec<SourceModule>, CorpusError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io(dir))? {
        let path = entry.map_err(io(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(EXTENSION) {
            continue;
        }
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let text = fs::read_to_string(&path).map_err(io(&path))?;
        out.push(SourceModule::new(name, path, text));
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

/// Every `.mdyn` module directly in `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<SourceModule>, CorpusError> {
    sources_in(dir)
}

fn read_tsv(path: &Path) -> Result<Vec<csv::StringRecord>, CorpusError> {
    let bad = |message: String| CorpusError::Manifest {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(io(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .from_reader(text.as_bytes());
    reader.records().map(|r| r.map_err(|e| bad(e.to_string()))).collect()
}

/// Parses `manifest.tsv` (columns: module, predicates, lines,
/// max_branch_coverage, note).
pub fn load_manifest(dir: &Path) -> Result<CorpusManifest, CorpusError> {
    let path = dir.join("manifest.tsv");
    let bad = |message: String| CorpusError::Manifest {
        path: path.clone(),
        message,
    };
    let mut entries = Vec::new();
    for r in read_tsv(&path)? {
        let field = |i: usize| r.get(i).ok_or_else(|| bad(format!("row {:?} has no column {i}", r)));
        let number = |i: usize| -> Result<usize, CorpusError> {
            field(i)?.parse().map_err(|_| bad(format!("column {i} of {:?} is not a count", r)))
        };
        entries.push(CorpusEntry {
            module: field(0)?.to_string(),
            predicates: number(1)?,
            lines: number(2)?,
            max_branch_coverage: field(3)?
                .parse()
                .map_err(|_| bad(format!("coverage in {:?} is not a number", r)))?,
            note: r.get(4).unwrap_or_default().to_string(),
        });
    }
    Ok(CorpusManifest { entries })
}

/// Modules under `negative/` paired with the line their syntax error is
/// expected on (from `negative/expected.tsv`).
pub fn load_negative(dir: &Path) -> Result<Vec<(SourceModule, LineNo)>, CorpusError> {
    let neg = dir.join("negative");
    let expected_path = neg.join("expected.tsv");
    let expected = read_tsv(&expected_path)?;
    let mut out = Vec::new();
    for src in sources_in(&neg)? {
        let line = expected
            .iter()
            .find(|r| r.get(0) == Some(src.name.as_str()))
            .and_then(|r| r.get(1)?.parse().ok())
            .ok_or_else(|| CorpusError::Manifest {
                path: expected_path.clone(),
                message: format!("no expected line for {}", src.name),
            })?;
        out.push((src, line));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_module;

    #[test]
    fn negative_cases_fail_on_the_recorded_line() {
        let cases = load_negative(&default_corpus_dir()).unwrap();
        assert_eq!(cases.len(), 6);
        for (src, line) in cases {
            let err = parse_module(&src).unwrap_err();
            assert_eq!(err.line, line, "{}", src.name);
        }
    }

    #[test]
    fn manifest_lists_every_module() {
        let dir = default_corpus_dir();
        let manifest = load_manifest(&dir).unwrap();
        let names: Vec<_> = load_corpus(&dir).unwrap().into_iter().map(|s| s.name).collect();
        let listed: Vec<_> = manifest.entries.iter().map(|e| e.module.clone()).collect();
        assert_eq!(names, listed);
    }
}
