//! Report records and their CSV / JSON / SVG renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::RunError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Cell::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    IdentityFailure,
    NonConvergence,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::IdentityFailure => 3,
            Status::NonConvergence => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlotKind {
    Scatter,
    /// Log-log axes with the least-squares line `ln y = slope ln x + intercept`.
    LogLogFit { slope: f64, intercept: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRecord {
    pub scenario: String,
    pub params: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub brackets: BTreeMap<String, f64>,
    pub flags: Vec<String>,
    pub seed: u64,
    pub plot: Option<Plot>,
    pub status: Status,
}

impl ReportRecord {
    pub fn new(scenario: impl Into<String>, header: &[&str], params: Vec<(String, String)>, seed: u64) -> Self {
        ReportRecord {
            scenario: scenario.into(),
            params,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            brackets: BTreeMap::new(),
            flags: Vec::new(),
            seed,
            plot: None,
            status: Status::Ok,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of a numeric column, skipping non-numeric cells.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(c) = self.column(name) else {
            return Vec::new();
        };
        self.rows.iter().filter_map(|r| r[c].as_f64()).collect()
    }

    pub fn bracket(&self, key: &str) -> Option<f64> {
        self.brackets.get(key).copied()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("csv to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("csv to memory");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8 csv")
    }

    pub fn to_json_value(&self) -> Value {
        let params: Map<String, Value> = self.params.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.header.iter().cloned().zip(r.iter().map(Cell::json)).collect()))
            .collect();
        let brackets: Map<String, Value> = self
            .brackets
            .iter()
            .map(|(k, v)| (k.clone(), Cell::Float(*v).json()))
            .collect();
        json!({
            "scenario": self.scenario,
            "params": params,
            "rows": rows,
            "brackets": brackets,
            "flags": self.flags,
            "seed": self.seed,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("json to memory");
        s.push('\n');
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

pub fn parse_formats(s: &str) -> Result<Vec<Format>, RunError> {
    let mut out: Vec<Format> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(RunError::Usage(format!("unknown format {other:?}"))),
        })
        .collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Writes `<scenario>.<ext>` for each format; SVG only when the record
/// carries a plot.
pub fn emit(record: &ReportRecord, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for f in formats {
        let (ext, body) = match f {
            Format::Csv => ("csv", record.to_csv()),
            Format::Json => ("json", record.to_json()),
            Format::Svg => match &record.plot {
                Some(p) => ("svg", render_svg(p)),
                None => continue,
            },
        };
        let path = dir.join(format!("{}.{ext}", record.scenario));
        std::fs::write(&path, body).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

/// Least-squares fit of `ln y` against `ln x`: `(slope, intercept)`.
pub fn loglog_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn render_svg(plot: &Plot) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const M: f64 = 56.0;
    let log = matches!(plot.kind, PlotKind::LogLogFit { .. });
    let tx = |v: f64| if log { v.ln() } else { v };
    let pts: Vec<(f64, f64)> = plot
        .points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log || (*x > 0.0 && *y > 0.0)))
        .map(|(x, y)| (tx(*x), tx(*y)))
        .collect();
    let range = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = range(&mut pts.iter().map(|p| p.0));
    let (y0, y1) = range(&mut pts.iter().map(|p| p.1));
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{M} {} H{} M{M} {} V{M}" stroke="black" fill="none"/>"#,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(&plot.title));
    let axis = |l: &str| if log { format!("ln {l}") } else { l.to_string() };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        W / 2.0,
        H - 16.0,
        esc(&axis(&plot.x_label))
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(&axis(&plot.y_label))
    );
    for (v, anchor, x, y) in [
        (x0, "start", sx(x0), H - M + 16.0),
        (x1, "end", sx(x1), H - M + 16.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-size="10">{v:.3}</text>"#);
    }
    for (v, y) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(s, r#"<text x="{}" y="{y:.1}" text-anchor="end" font-size="10">{v:.3}</text>"#, M - 4.0);
    }
    for (x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(*x), sy(*y));
    }
    if let PlotKind::LogLogFit { slope, intercept } = plot.kind {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick"/>"#,
            sx(x0),
            sy(slope * x0 + intercept),
            sx(x1),
            sy(slope * x1 + intercept)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" font-size="12" fill="firebrick">slope = {slope:.4}</text>"#,
            W - M,
            M
        );
    }
    s.push_str("</svg>\n");
    s
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_exit_codes() {
        assert_eq!(Status::Ok.exit_code(), 0);
        assert_eq!(Status::IdentityFailure.exit_code(), 3);
        assert_eq!(Status::NonConvergence.exit_code(), 4);
    }

    #[test]
    fn empty_rows_give_header_only() {
        let r = ReportRecord::new("x", &["a", "b"], vec![], 3);
        assert_eq!(r.to_csv(), "a,b\n");
        let v = r.to_json_value();
        assert_eq!(v["rows"], json!([]));
        assert_eq!(v["seed"], json!(3));
    }

    #[test]
    fn csv_quotes_intervals() {
        let mut r = ReportRecord::new("x", &["j", "v"], vec![], 0);
        r.push(vec![Cell::text("[0, 1/2)"), Cell::Float(0.5)]);
        assert_eq!(r.to_csv(), "j,v\n\"[0, 1/2)\",0.5\n");
        assert_eq!(r.to_json_value()["rows"][0]["v"], json!(0.5));
    }

    #[test]
    fn fit_recovers_power_law() {
        let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0].iter().map(|n: &f64| (*n, 3.0 * n.powf(-0.25))).collect();
        let (s, b) = loglog_fit(&pts);
        assert!((s + 0.25).abs() < 1e-12 && (b - 3f64.ln()).abs() < 1e-12);
        let svg = render_svg(&Plot {
            kind: PlotKind::LogLogFit { slope: s, intercept: b },
            title: "t".into(),
            x_label: "N".into(),
            y_label: "r".into(),
            points: pts,
        });
        assert!(svg.contains("slope = -0.2500"));
    }
}
