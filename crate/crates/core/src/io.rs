//! Text formats: grid fields, elevation matrices, JSON reports and
//! plot-ready CSV.
//!
//! A grid field file starts with
//! `#GRIDFIELD v1 d=<d> m=<m> kind=<mod1|real>` (optionally followed by
//! `seed=<u64>` and further `key=value` tokens), then holds one line per grid
//! point in lexicographic order: the 1-based index components and the value,
//! comma separated. Values are printed with 17 significant digits, which
//! round-trips every binary64 exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::certificate::CertificateReport;
use crate::circle::Mod1Value;
use crate::error::{Error, Result};
use crate::grid::{GridField, UniformGrid};
use crate::harness::mc::{McSummary, TrialRecord};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Mod1,
    Real,
}

impl FieldKind {
    fn as_str(self) -> &'static str {
        match self {
            FieldKind::Mod1 => "mod1",
            FieldKind::Real => "real",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridFileHeader {
    pub d: usize,
    pub m: usize,
    pub kind: FieldKind,
    pub seed: Option<u64>,
    pub meta: BTreeMap<String, String>,
}

impl GridFileHeader {
    pub fn new(grid: UniformGrid, kind: FieldKind) -> Self {
        GridFileHeader {
            d: grid.d(),
            m: grid.m(),
            kind,
            seed: None,
            meta: BTreeMap::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn render(&self) -> String {
        let mut line = format!("#GRIDFIELD v1 d={} m={} kind={}", self.d, self.m, self.kind.as_str());
        if let Some(seed) = self.seed {
            let _ = write!(line, " seed={seed}");
        }
        for (k, v) in &self.meta {
            let _ = write!(line, " {k}={v}");
        }
        line
    }

    fn parse(line: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("#GRIDFIELD") || tokens.next() != Some("v1") {
            return Err(Error::format(1, "expected header '#GRIDFIELD v1 ...'"));
        }
        let (mut d, mut m, mut kind, mut seed) = (None, None, None, None);
        let mut meta = BTreeMap::new();
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| Error::format(1, format!("header token '{tok}' is not key=value")))?;
            let bad = |what: &str| Error::format(1, format!("bad {what} '{value}'"));
            match key {
                "d" => d = Some(value.parse::<usize>().map_err(|_| bad("dimension"))?),
                "m" => m = Some(value.parse::<usize>().map_err(|_| bad("side length"))?),
                "kind" => {
                    kind = Some(match value {
                        "mod1" => FieldKind::Mod1,
                        "real" => FieldKind::Real,
                        _ => return Err(bad("kind")),
                    })
                }
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                _ => {
                    meta.insert(key.to_string(), value.to_string());
                }
            }
        }
        let missing = |what: &str| Error::format(1, format!("header lacks {what}="));
        Ok(GridFileHeader {
            d: d.ok_or_else(|| missing("d"))?,
            m: m.ok_or_else(|| missing("m"))?,
            kind: kind.ok_or_else(|| missing("kind"))?,
            seed,
            meta,
        })
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Renders a field in the grid file format.
pub fn format_field(header: &GridFileHeader, values: &[f64]) -> Result<String> {
    let grid = UniformGrid::new(header.d, header.m)?;
    if values.len() != grid.n() {
        return Err(Error::invalid(format!("{} values for a grid of {} points", values.len(), grid.n())));
    }
    let mut out = header.render();
    out.push('\n');
    for (l, v) in values.iter().enumerate() {
        for c in grid.multi_index(l).components() {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{v:.16e}");
    }
    Ok(out)
}

/// Parses the grid file format, checking index order and, for `mod1`
/// files, that every value lies in `[0, 1)`.
pub fn parse_field(text: &str) -> Result<(GridFileHeader, GridField<f64>)> {
    let mut lines = text.lines();
    let header = GridFileHeader::parse(lines.next().ok_or_else(|| Error::format(1, "empty file"))?)?;
    let grid = UniformGrid::new(header.d, header.m).map_err(|e| Error::format(1, e.to_string()))?;
    let n = grid.n();
    let mut values = Vec::with_capacity(n);
    for (offset, line) in lines.enumerate() {
        let lineno = offset + 2;
        if line.trim().is_empty() {
            continue;
        }
        if values.len() == n {
            return Err(Error::format(lineno, format!("more than the {n} rows declared by the header")));
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != header.d + 1 {
            return Err(Error::format(lineno, format!("expected {} comma-separated fields", header.d + 1)));
        }
        let expected = grid.multi_index(values.len());
        for (p, &want) in parts[..header.d].iter().zip(expected.components()) {
            let got: usize = p.parse().map_err(|_| Error::format(lineno, format!("bad index component '{p}'")))?;
            if got != want {
                return Err(Error::format(lineno, format!("index {:?} out of lexicographic order", expected.components())));
            }
        }
        let value: f64 = parts[header.d]
            .parse()
            .map_err(|_| Error::format(lineno, format!("bad value '{}'", parts[header.d])))?;
        if header.kind == FieldKind::Mod1 && !(0.0..1.0).contains(&value) {
            return Err(Error::format(lineno, format!("mod1 value {value} outside [0, 1)")));
        }
        values.push(value);
    }
    if values.len() != n {
        return Err(Error::format(
            text.lines().count() + 1,
            format!("header declares {n} rows, found {}", values.len()),
        ));
    }
    Ok((header, GridField::new(grid, values)?))
}

pub fn write_real_field(path: impl AsRef<Path>, field: &GridField<f64>, header: Option<GridFileHeader>) -> Result<()> {
    let header = header.unwrap_or_else(|| GridFileHeader::new(field.grid(), FieldKind::Real));
    let header = GridFileHeader { kind: FieldKind::Real, ..header };
    write_text(path.as_ref(), &format_field(&header, field.values())?)
}

pub fn write_mod1_field(path: impl AsRef<Path>, field: &GridField<Mod1Value>, header: Option<GridFileHeader>) -> Result<()> {
    let header = header.unwrap_or_else(|| GridFileHeader::new(field.grid(), FieldKind::Mod1));
    let header = GridFileHeader { kind: FieldKind::Mod1, ..header };
    let values: Vec<f64> = field.values().iter().map(|v| v.get()).collect();
    write_text(path.as_ref(), &format_field(&header, &values)?)
}

/// Reads a field of either kind as real values.
pub fn read_field(path: impl AsRef<Path>) -> Result<(GridFileHeader, GridField<f64>)> {
    parse_field(&read_text(path.as_ref())?)
}

/// Reads a field declared `kind=mod1`.
pub fn read_mod1_field(path: impl AsRef<Path>) -> Result<(GridFileHeader, GridField<Mod1Value>)> {
    let (header, field) = read_field(path)?;
    if header.kind != FieldKind::Mod1 {
        return Err(Error::format(1, "expected kind=mod1"));
    }
    let values = field.values().iter().map(|&v| Mod1Value::new(v)).collect::<Result<Vec<_>>>()?;
    Ok((header, GridField::new(field.grid(), values)?))
}

/// Parses whitespace-separated rows of equal length. With `crop`, keeps
/// the leading `s × s` block, `s` the smaller dimension.
pub fn parse_elevation(text: &str, crop: bool) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::format(i + 1, format!("bad number '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::format(i + 1, format!("row has {} values, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::format(1, "elevation file holds no rows"));
    }
    if crop {
        let s = rows.len().min(rows[0].len());
        rows.truncate(s);
        for r in &mut rows {
            r.truncate(s);
        }
    }
    Ok(rows)
}

pub fn read_elevation(path: impl AsRef<Path>, crop: bool) -> Result<Vec<Vec<f64>>> {
    parse_elevation(&read_text(path.as_ref())?, crop)
}

/// Results document written by experiment commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    /// The configuration that produced the results, echoed verbatim.
    pub config: serde_json::Value,
    pub trials: Vec<TrialRecord>,
    pub summary: Option<McSummary>,
    pub certificates: Vec<CertificateReport>,
}

impl Report {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.into(),
            config,
            trials: Vec::new(),
            summary: None,
            certificates: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn write_report(path: impl AsRef<Path>, report: &Report) -> Result<()> {
    write_text(path.as_ref(), &report.to_json()?)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    Ok(serde_json::from_str(&read_text(path.as_ref())?)?)
}

/// `n,method,metric,mean,std` rows, one per summarized metric.
pub fn summary_csv(summary: &McSummary) -> String {
    let mut out = String::from("n,method,metric,mean,std\n");
    for e in &summary.entries {
        for (name, stat) in e.metrics() {
            if let Some(s) = stat {
                let _ = writeln!(out, "{},{},{},{:.16e},{:.16e}", e.n, e.method.label(), name, s.mean, s.std);
            }
        }
    }
    out
}

pub fn write_summary_csv(path: impl AsRef<Path>, summary: &McSummary) -> Result<()> {
    write_text(path.as_ref(), &summary_csv(summary))
}
