//! File formats. Floats are written with 12 significant digits so that
//! identical runs produce identical bytes; every writer has a matching reader.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::CliError;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

fn parse_f64(field: &str, column: &str) -> Result<f64, CliError> {
    field
        .trim()
        .parse()
        .map_err(|_| CliError::Runtime(format!("column {column}: cannot parse {field:?}")))
}

/// Label usable in a file name (`*` becomes `rest`).
pub fn file_label(label: &str) -> String {
    label.replace('*', "rest")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorderRow {
    pub b_bar: f64,
    pub delta: f64,
    /// `None` when the split is never entangled on the scan grid.
    pub t_limit: Option<f64>,
    pub k_at_limit: usize,
    pub reentry_intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub t: f64,
    pub negativity: f64,
    pub k: usize,
}

const BORDER_HEADER: [&str; 5] = ["b_bar", "delta", "t_limit", "k_at_limit", "reentry_intervals"];
const PROFILE_HEADER: [&str; 3] = ["t", "negativity", "k"];

fn intervals_json(intervals: &[(f64, f64)]) -> String {
    let parts: Vec<String> = intervals
        .iter()
        .map(|(a, b)| format!("[{},{}]", fmt_f64(*a), fmt_f64(*b)))
        .collect();
    format!("[{}]", parts.join(","))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let found = r.headers().map_err(|e| io_err(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(io_err(path, format!("unexpected header {found:?}")));
    }
    r.records().map(|rec| rec.map_err(|e| io_err(path, e))).collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

pub fn write_border(path: &Path, format: Format, rows: &[BorderRow]) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(path, &rows),
        Format::Csv => write_csv(
            path,
            &BORDER_HEADER,
            rows.iter().map(|r| {
                vec![
                    fmt_f64(r.b_bar),
                    fmt_f64(r.delta),
                    r.t_limit.map(fmt_f64).unwrap_or_default(),
                    r.k_at_limit.to_string(),
                    intervals_json(&r.reentry_intervals),
                ]
            }),
        ),
    }
}

pub fn read_border(path: &Path, format: Format) -> Result<Vec<BorderRow>, CliError> {
    if format == Format::Json {
        return read_json(path);
    }
    read_csv(path, &BORDER_HEADER)?
        .iter()
        .map(|rec| {
            let t_limit = match rec[2].trim() {
                "" => None,
                s => Some(parse_f64(s, "t_limit")?),
            };
            Ok(BorderRow {
                b_bar: parse_f64(&rec[0], "b_bar")?,
                delta: parse_f64(&rec[1], "delta")?,
                t_limit,
                k_at_limit: rec[3]
                    .parse()
                    .map_err(|_| CliError::Runtime(format!("column k_at_limit: cannot parse {:?}", &rec[3])))?,
                reentry_intervals: serde_json::from_str(&rec[4])
                    .map_err(|e| CliError::Runtime(format!("column reentry_intervals: {e}")))?,
            })
        })
        .collect()
}

pub fn write_profile(path: &Path, format: Format, rows: &[ProfileRow]) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(path, &rows),
        Format::Csv => write_csv(
            path,
            &PROFILE_HEADER,
            rows.iter().map(|r| vec![fmt_f64(r.t), fmt_f64(r.negativity), r.k.to_string()]),
        ),
    }
}

pub fn read_profile(path: &Path, format: Format) -> Result<Vec<ProfileRow>, CliError> {
    if format == Format::Json {
        return read_json(path);
    }
    read_csv(path, &PROFILE_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ProfileRow {
                t: parse_f64(&rec[0], "t")?,
                negativity: parse_f64(&rec[1], "negativity")?,
                k: rec[2]
                    .parse()
                    .map_err(|_| CliError::Runtime(format!("column k: cannot parse {:?}", &rec[2])))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub config: RunConfig,
    /// Output files relative to the output directory, in write order.
    pub files: Vec<String>,
    /// Work items that failed; their files are missing or partial.
    pub errors: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: xxz_core::VERSION.into(),
            command: command.into(),
            config: config.clone(),
            files: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn path(dir: &Path) -> PathBuf {
        dir.join("manifest.json")
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_json(&Self::path(dir), self)
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        read_json(&Self::path(dir))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_f64(0.0), "0.00000000000e0");
        assert_eq!(fmt_f64(-2.5e-12), "-2.50000000000e-12");
    }

    #[test]
    fn intervals_column_is_json() {
        let text = intervals_json(&[(0.1, 0.2), (1.0, 3.0)]);
        let back: Vec<(f64, f64)> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![(0.1, 0.2), (1.0, 3.0)]);
        assert_eq!(intervals_json(&[]), "[]");
    }

    #[test]
    fn star_is_renamed_in_file_labels() {
        assert_eq!(file_label("a-*"), "a-rest");
        assert_eq!(file_label("ab-cd"), "ab-cd");
    }
}
