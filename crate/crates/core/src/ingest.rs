//! Delimited-text loading for real datasets.
//!
//! Columns are addressed by 1-based position or by header name. Comma, tab
//! and whitespace delimiters are detected from the first non-empty line
//! unless one is given. Cells that are empty or read `NA`, `NaN` or `?` are
//! missing; a row with a missing value in a referenced column is an error
//! unless incomplete rows are dropped explicitly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    /// 1-based column position.
    Index(usize),
    Name(String),
}

impl FromStr for ColumnRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Config("empty column reference".into()));
        }
        match s.parse::<usize>() {
            Ok(0) => Err(Error::Config("column positions are 1-based".into())),
            Ok(i) => Ok(ColumnRef::Index(i)),
            Err(_) => Ok(ColumnRef::Name(s.to_string())),
        }
    }
}

/// Parses a comma-separated list of columns; `a-b` expands to a range of
/// positions.
pub fn parse_column_list(s: &str) -> Result<Vec<ColumnRef>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once('-') {
            if let (Ok(a), Ok(b)) = (a.trim().parse::<usize>(), b.trim().parse::<usize>()) {
                if a == 0 || b < a {
                    return Err(Error::Config(format!("invalid column range '{part}'")));
                }
                out.extend((a..=b).map(ColumnRef::Index));
                continue;
            }
        }
        out.push(part.parse()?);
    }
    if out.is_empty() {
        return Err(Error::Config("no columns listed".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Comma,
    Tab,
    Whitespace,
}

impl FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comma" | "," => Ok(Delimiter::Comma),
            "tab" | "\\t" | "\t" => Ok(Delimiter::Tab),
            "whitespace" | "space" | " " => Ok(Delimiter::Whitespace),
            other => Err(Error::Config(format!("unknown delimiter '{other}'"))),
        }
    }
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        if line.contains(',') {
            Delimiter::Comma
        } else if line.contains('\t')
            && line.split('\t').all(|f| !f.trim().contains(char::is_whitespace))
        {
            Delimiter::Tab
        } else {
            Delimiter::Whitespace
        }
    }

    fn byte(self) -> Option<u8> {
        match self {
            Delimiter::Comma => Some(b','),
            Delimiter::Tab => Some(b'\t'),
            Delimiter::Whitespace => None,
        }
    }
}

/// Non-blank records of `text` with their 1-based line numbers.
fn records(text: &str, delimiter: Delimiter) -> Result<Vec<(usize, Vec<String>)>> {
    let Some(byte) = delimiter.byte() else {
        return Ok(text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l.split_whitespace().map(str::to_string).collect()))
            .collect());
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(byte)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        out.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub response: ColumnRef,
    pub predictors: Vec<ColumnRef>,
    pub skip_header: bool,
    /// `None` detects the delimiter from the first line.
    pub delimiter: Option<Delimiter>,
    pub drop_incomplete: bool,
}

impl ColumnSpec {
    pub fn new(response: ColumnRef, predictors: Vec<ColumnRef>) -> Self {
        ColumnSpec {
            response,
            predictors,
            skip_header: false,
            delimiter: None,
            drop_incomplete: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub dataset: Dataset,
    /// Header names of the response and predictors, when a header was read.
    pub names: Option<Vec<String>>,
    /// 1-based line numbers of rows dropped for missing values.
    pub dropped_lines: Vec<usize>,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "na" | "NaN" | "nan" | "?" | ".")
}

fn resolve(col: &ColumnRef, header: Option<&[&str]>, width: usize) -> Result<usize> {
    let idx = match col {
        ColumnRef::Index(i) => i - 1,
        ColumnRef::Name(name) => {
            let header = header.ok_or_else(|| {
                Error::Config(format!(
                    "column '{name}' referenced by name but the file has no header"
                ))
            })?;
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Config(format!("no column named '{name}'")))?
        }
    };
    if idx >= width {
        return Err(Error::Config(format!(
            "column {} does not exist (file has {width} columns)",
            idx + 1
        )));
    }
    Ok(idx)
}

/// Reads `path` into a dataset according to `spec`. Row order is preserved.
pub fn load_csv(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<LoadedData> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_delimited(&text, spec)
}

/// As [`load_csv`], from text already in memory.
pub fn parse_delimited(text: &str, spec: &ColumnSpec) -> Result<LoadedData> {
    let first_line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::Format("file contains no data".into()))?;
    let delimiter = spec.delimiter.unwrap_or_else(|| Delimiter::detect(first_line));
    let mut rows = records(text, delimiter)?.into_iter();
    let (first_no, first) = rows
        .next()
        .ok_or_else(|| Error::Format("file contains no data".into()))?;
    let width = first.len();
    let header: Option<Vec<&str>> = spec.skip_header.then(|| first.iter().map(String::as_str).collect());
    let first_data = if spec.skip_header {
        None
    } else {
        Some((first_no, first.clone()))
    };

    let response = resolve(&spec.response, header.as_deref(), width)?;
    let predictors: Vec<usize> = spec
        .predictors
        .iter()
        .map(|c| resolve(c, header.as_deref(), width))
        .collect::<Result<_>>()?;
    if predictors.is_empty() {
        return Err(Error::Config("at least one predictor column is required".into()));
    }
    if predictors.contains(&response) {
        return Err(Error::Config(format!(
            "response column {} is also listed as a predictor",
            response + 1
        )));
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut dropped_lines = Vec::new();
    let wanted: Vec<usize> = std::iter::once(response).chain(predictors.iter().copied()).collect();
    let mut values = vec![0.0; wanted.len()];

    for (line_no, cells) in first_data.into_iter().chain(rows) {
        if cells.len() != width {
            return Err(Error::Format(format!(
                "line {line_no} has {} fields, expected {width}",
                cells.len()
            )));
        }
        let mut missing = false;
        for (slot, &col) in values.iter_mut().zip(&wanted) {
            let cell = cells[col].as_str();
            if is_missing(cell) {
                missing = true;
                if !spec.drop_incomplete {
                    return Err(Error::Parse {
                        row: line_no,
                        column: col + 1,
                        message: "missing value".into(),
                    });
                }
                continue;
            }
            *slot = cell.parse::<f64>().map_err(|_| Error::Parse {
                row: line_no,
                column: col + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !slot.is_finite() {
                return Err(Error::Parse {
                    row: line_no,
                    column: col + 1,
                    message: format!("'{cell}' is not finite"),
                });
            }
        }
        if missing {
            dropped_lines.push(line_no);
            continue;
        }
        y.push(values[0]);
        x.extend_from_slice(&values[1..]);
    }

    if y.is_empty() {
        return Err(Error::Format("no complete data rows".into()));
    }
    let names = header.map(|h| wanted.iter().map(|&c| h[c].to_string()).collect());
    Ok(LoadedData {
        dataset: Dataset::from_flat(x, y, predictors.len())?,
        names,
        dropped_lines,
    })
}

/// Writes `d` as comma-separated text with the response first and a header
/// line `y,x1,...`. Values use the shortest representation that parses back
/// to the same `f64`.
pub fn to_csv(d: &Dataset) -> String {
    let mut out = String::from("y");
    for j in 1..=d.predictors() {
        let _ = write!(out, ",x{j}");
    }
    out.push('\n');
    for (x, y) in d.rows() {
        let _ = write!(out, "{y}");
        for v in x {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Column spec matching [`to_csv`] output.
pub fn csv_spec(d: &Dataset) -> ColumnSpec {
    ColumnSpec {
        skip_header: true,
        delimiter: Some(Delimiter::Comma),
        ..ColumnSpec::new(
            ColumnRef::Index(1),
            (2..=d.predictors() + 1).map(ColumnRef::Index).collect(),
        )
    }
}
