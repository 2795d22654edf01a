//! Long-format tables for plotting.

use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LongRow {
    pub source: String,
    pub t: usize,
    pub metric: String,
    /// Kept as written so values pass through without rounding.
    pub value: String,
}

/// Melts a CSV whose first column is `t` into `(source, t, metric, value)`
/// rows. Empty cells are skipped.
pub fn melt<R: Read>(source: &str, input: R) -> Result<Vec<LongRow>> {
    let err = |e: csv::Error| Error::Csv(format!("{source}: {e}"));
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(err)?.clone();
    if header.get(0) != Some("t") {
        return Err(Error::Csv(format!("{source}: first column must be `t`")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(err)?;
        let t: usize = rec[0]
            .parse()
            .map_err(|_| Error::Csv(format!("{source}: bad step `{}`", &rec[0])))?;
        for (metric, value) in header.iter().zip(rec.iter()).skip(1) {
            if !value.is_empty() {
                out.push(LongRow {
                    source: source.to_string(),
                    t,
                    metric: metric.to_string(),
                    value: value.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Source label for a file: its stem, qualified by the parent directory
/// name when that is `runs` (per-run files from different ensembles).
pub fn source_label(path: &Path) -> String {
    let stem = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into());
    match path.parent().and_then(|p| p.file_name()) {
        Some(dir) if dir == "runs" => {
            let ensemble = path
                .parent()
                .and_then(|p| p.parent())
                .and_then(|p| p.file_name())
                .map(|s| s.to_string_lossy().into_owned());
            ensemble.map_or(stem.clone(), |e| format!("{e}/{stem}"))
        }
        _ => stem,
    }
}

pub fn write_long<W: Write>(out: W, rows: &[LongRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record(["source", "t", "metric", "value"]).map_err(err)?;
    for r in rows {
        w.write_record([r.source.as_str(), &r.t.to_string(), &r.metric, &r.value])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn report_files<W: Write>(inputs: &[impl AsRef<Path>], out: W) -> Result<usize> {
    let mut rows = Vec::new();
    for path in inputs {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        rows.extend(melt(&source_label(path), std::io::BufReader::new(file))?);
    }
    write_long(out, &rows)?;
    Ok(rows.len())
}
