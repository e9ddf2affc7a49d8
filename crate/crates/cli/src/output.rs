use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Twelve significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Writes `bytes` to `path` through a sibling temp file, or to stdout when `path` is `None`.
pub fn write_atomic(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(bytes)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// CSV with the given header; every row must already be formatted.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Numeric(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Numeric(format!("csv encoding failed: {e}")))
}

/// Fails with a numeric error when any value is not finite.
pub fn ensure_finite(what: &str, values: impl IntoIterator<Item = f64>) -> Result<(), CliError> {
    match values.into_iter().enumerate().find(|(_, v)| !v.is_finite()) {
        Some((i, v)) => Err(CliError::Numeric(format!("{what}: non-finite value {v} at row {i}"))),
        None => Ok(()),
    }
}
