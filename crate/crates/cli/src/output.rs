//! CSV tables, manifest and optional SVG rendering.

use crate::error::CliError;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Na,
}

impl Cell {
    /// Non-finite values and failed evaluations become `NA`.
    pub fn from_result<E>(r: Result<f64, E>) -> Cell {
        r.map_or(Cell::Na, Cell::from)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(v) => Some(v),
            Cell::Int(v) => Some(v as f64),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.12e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Na => "NA".into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Na
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Na, Cell::from)
    }
}

/// A named CSV dataset with unit-annotated header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Metadata written next to the datasets.
pub struct Manifest<'a> {
    pub scenario: &'a str,
    pub config_text: &'a str,
    pub seed: u64,
    pub threads: usize,
    pub runtime: Duration,
}

/// Writes every table (and its plot when requested) plus `manifest.txt`; returns the paths.
pub fn write_outputs(
    dir: &Path,
    tables: &[Table],
    manifest: &Manifest<'_>,
    plot: bool,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let mut listing = String::new();
    for t in tables {
        let bytes = t.to_csv()?;
        let path = dir.join(t.file_name());
        write_file(&path, &bytes)?;
        let _ = writeln!(
            listing,
            "file = {} sha256 = {} rows = {}",
            t.file_name(),
            sha256_hex(&bytes),
            t.rows.len()
        );
        written.push(path);
        if plot {
            if let Some(svg) = render_svg(t) {
                let path = dir.join(format!("{}.svg", t.name));
                write_file(&path, svg.as_bytes())?;
                let _ = writeln!(listing, "file = {}.svg", t.name);
                written.push(path);
            }
        }
    }
    let text = format!(
        "scenario = {}\nconfig_sha256 = {}\ntool_version = {}\ncore_version = {}\nseed = {}\nthreads = {}\nruntime_s = {:.3}\n{}",
        manifest.scenario,
        sha256_hex(manifest.config_text.as_bytes()),
        env!("CARGO_PKG_VERSION"),
        ratiosense_core::VERSION,
        manifest.seed,
        manifest.threads,
        manifest.runtime.as_secs_f64(),
        listing
    );
    let path = dir.join("manifest.txt");
    write_file(&path, text.as_bytes())?;
    written.push(path);
    Ok(written)
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64> + Clone) -> Option<Axis> {
        let log = values.clone().all(|v| v > 0.0);
        let map = |v: f64| if log { v.log10() } else { v };
        let (lo, hi) = values
            .map(map)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            return None;
        }
        let pad = if hi > lo { 0.0 } else { 0.5 };
        Some(Axis {
            lo: lo - pad,
            hi: hi + pad,
            log,
        })
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn label(&self, u: f64) -> String {
        let v = self.lo + u * (self.hi - self.lo);
        if self.log {
            format!("{:.3e}", 10f64.powf(v))
        } else {
            format!("{v:.3e}")
        }
    }
}

/// Scatter plot of every numeric column against the first one.
pub fn render_svg(table: &Table) -> Option<String> {
    let xs: Vec<Option<f64>> = table.rows.iter().map(|r| r[0].as_f64()).collect();
    let series: Vec<usize> = (1..table.header.len())
        .filter(|&c| table.rows.iter().any(|r| matches!(r[c], Cell::Num(_))))
        .collect();
    if series.is_empty() || xs.iter().all(Option::is_none) {
        return None;
    }
    let points = |c: usize| {
        xs.iter()
            .zip(&table.rows)
            .filter_map(move |(x, r)| Some((((*x)?), r[c].as_f64()?)))
    };
    let x_axis = Axis::fit(
        series
            .iter()
            .flat_map(|&c| points(c).map(|p| p.0))
            .collect::<Vec<_>>()
            .into_iter(),
    )?;
    let y_axis = Axis::fit(
        series
            .iter()
            .flat_map(|&c| points(c).map(|p| p.1))
            .collect::<Vec<_>>()
            .into_iter(),
    )?;
    let (pw, ph) = (SVG_W - 2.0 * MARGIN, SVG_H - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let u = k as f64 / 4.0;
        let (x, y) = (MARGIN + u * pw, SVG_H - MARGIN - u * ph);
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            SVG_H - MARGIN + 16.0,
            x_axis.label(u)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            y_axis.label(u)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        SVG_W / 2.0,
        SVG_H - 12.0,
        table.header[0]
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        SVG_W / 2.0,
        table.name
    );
    for (i, &c) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for (x, y) in points(c) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                MARGIN + x_axis.unit(x) * pw,
                SVG_H - MARGIN - y_axis.unit(y) * ph
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 * (i + 1) as f64,
            table.header[c]
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undefined_values_render_as_na() {
        let mut t = Table::new("t", &["x[1]", "y[1]"]);
        t.push(vec![Cell::from(1.0), Cell::from(f64::NAN)]);
        t.push(vec![Cell::from(2.0), Cell::from_result::<()>(Err(()))]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "x[1],y[1]\n1.000000000000e0,NA\n2.000000000000e0,NA\n");
    }

    #[test]
    fn svg_needs_numeric_series() {
        let mut t = Table::new("t", &["x", "label"]);
        t.push(vec![Cell::from(1.0), Cell::from("a")]);
        assert!(render_svg(&t).is_none());
        let mut u = Table::new("u", &["x", "y"]);
        u.push(vec![Cell::from(1.0), Cell::from(2.0)]);
        u.push(vec![Cell::from(2.0), Cell::from(3.0)]);
        assert!(render_svg(&u).unwrap().contains("<circle"));
    }

    #[test]
    fn digest_is_hex() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
