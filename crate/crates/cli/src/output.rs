//! CSV and JSON writers with fixed float formatting.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Twelve significant digits; absent or non-finite values become empty cells.
pub fn fmt_float(value: Option<f64>) -> String {
    match value {
        Some(v) if v.is_finite() => format!("{v:.11e}"),
        _ => String::new(),
    }
}

pub fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.into(),
        source,
    })
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult<PathBuf>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush().map_err(|source| CliError::Write {
        path: path.into(),
        source,
    })?;
    Ok(path.into())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.into(),
        source,
    })?;
    Ok(path.into())
}
