//! Corpus manifests: CSV with header `speaker,style,utterance_id,path`.
//! Relative paths resolve against the manifest's directory.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use stylekit::Style;

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 4] = ["speaker", "style", "utterance_id", "path"];

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub speaker: String,
    pub style: Style,
    pub utterance_id: String,
    pub path: PathBuf,
    /// 1-based line in the manifest file.
    pub line: usize,
}

pub fn read(path: &Path) -> CliResult<Vec<Record>> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::usage(format!("cannot open manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse(file, base).map_err(|e| e.context(path.display()))
}

pub fn parse(input: impl std::io::Read, base: &Path) -> CliResult<Vec<Record>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| CliError::usage(e.to_string()))?;
    if !header.iter().eq(HEADER) {
        return Err(CliError::usage(format!("line 1: header must be `{}`", HEADER.join(","))));
    }
    let mut seen: HashMap<(String, Style, String), usize> = HashMap::new();
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::usage(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |m: String| CliError::usage(format!("line {line}: {m}"));
        let [speaker, style, utterance_id, path] = [0, 1, 2, 3].map(|i| rec[i].to_string());
        if speaker.is_empty() || utterance_id.is_empty() || path.is_empty() {
            return Err(bad("speaker, utterance_id and path must be non-empty".into()));
        }
        let style: Style = style.parse().map_err(|e: stylekit::Error| bad(e.to_string()))?;
        if let Some(first) = seen.insert((speaker.clone(), style, utterance_id.clone()), line) {
            return Err(bad(format!(
                "duplicate entry ({speaker}, {style}, {utterance_id}), first seen on line {first}"
            )));
        }
        out.push(Record { speaker, style, utterance_id, path: base.join(path), line });
    }
    Ok(out)
}

/// Writes a manifest; paths are written as given.
pub fn write(w: impl std::io::Write, records: &[Record]) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| CliError::failed(e.to_string());
    out.write_record(HEADER).map_err(io)?;
    for r in records {
        out.write_record([&r.speaker, r.style.as_str(), &r.utterance_id, &r.path.to_string_lossy()]).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}
