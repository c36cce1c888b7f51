//! On-disk formats: CSV tables for edge and node curvatures, JSON documents
//! and static SVG plots.
//!
//! Floats in CSV are written with 17 significant digits so they parse back
//! to the same bits. Missing values are empty cells.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::Serialize;
use thiserror::Error;

use crate::curvature::{AggKind, CurvatureReport, EstimatorKind};
use crate::harness::{AgreementResult, Histogram};
use crate::hypergraph::{EdgeId, VertexId};

pub const EDGE_COLUMNS: [&str; 7] =
    ["edge_id", "cardinality", "agg", "curvature", "estimator", "time_ns", "skip_reason"];
pub const NODE_COLUMNS: [&str; 4] = ["node_id", "kappa_n", "kappa_e", "skip_reason"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("row {row}: {message}")]
    Field { row: usize, message: String },
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
}

/// One row of the edge table.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRow {
    pub edge_id: EdgeId,
    pub cardinality: usize,
    pub agg: AggKind,
    pub curvature: Option<f64>,
    pub estimator: EstimatorKind,
    pub time_ns: u64,
    pub skip_reason: Option<String>,
}

/// One row of the node table.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRow {
    pub node_id: VertexId,
    pub kappa_n: Option<f64>,
    pub kappa_e: Option<f64>,
    pub skip_reason: Option<String>,
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn parse_opt(row: usize, s: &str) -> Result<Option<f64>, ReportError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| ReportError::Field { row, message: format!("bad number {s:?}") })
}

fn parse_field<T: std::str::FromStr>(row: usize, s: &str) -> Result<T, ReportError>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| ReportError::Field { row, message: format!("{s:?}: {e}") })
}

pub fn edge_rows(report: &CurvatureReport) -> Vec<EdgeRow> {
    report
        .edges
        .iter()
        .map(|e| EdgeRow {
            edge_id: e.edge_id,
            cardinality: e.cardinality,
            agg: report.meta.agg,
            curvature: e.curvature,
            estimator: report.meta.estimator,
            time_ns: e.time_ns,
            skip_reason: e.skip_reason.clone(),
        })
        .collect()
}

pub fn node_rows(report: &CurvatureReport) -> Vec<NodeRow> {
    report
        .nodes
        .iter()
        .map(|n| NodeRow {
            node_id: n.node_id,
            kappa_n: n.kappa_n,
            kappa_e: n.kappa_e,
            skip_reason: n.skip_reason.clone(),
        })
        .collect()
}

pub fn write_edge_csv<W: Write>(out: W, rows: &[EdgeRow]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EDGE_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.edge_id.to_string(),
            r.cardinality.to_string(),
            r.agg.to_string(),
            format_opt(r.curvature),
            r.estimator.to_string(),
            r.time_ns.to_string(),
            r.skip_reason.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_node_csv<W: Write>(out: W, rows: &[NodeRow]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NODE_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.node_id.to_string(),
            format_opt(r.kappa_n),
            format_opt(r.kappa_e),
            r.skip_reason.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn check_header<R: Read>(r: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), ReportError> {
    let header = r.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(ReportError::Header(header.iter().map(String::from).collect()));
    }
    Ok(())
}

fn opt_text(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

pub fn read_edge_csv<R: Read>(input: R) -> Result<Vec<EdgeRow>, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &EDGE_COLUMNS)?;
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = k + 1;
        rows.push(EdgeRow {
            edge_id: parse_field(row, &rec[0])?,
            cardinality: parse_field(row, &rec[1])?,
            agg: parse_field(row, &rec[2])?,
            curvature: parse_opt(row, &rec[3])?,
            estimator: parse_field(row, &rec[4])?,
            time_ns: parse_field(row, &rec[5])?,
            skip_reason: opt_text(&rec[6]),
        });
    }
    Ok(rows)
}

pub fn read_node_csv<R: Read>(input: R) -> Result<Vec<NodeRow>, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &NODE_COLUMNS)?;
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = k + 1;
        rows.push(NodeRow {
            node_id: parse_field(row, &rec[0])?,
            kappa_n: parse_opt(row, &rec[1])?,
            kappa_e: parse_opt(row, &rec[2])?,
            skip_reason: opt_text(&rec[3]),
        });
    }
    Ok(rows)
}

/// Raw agreement samples: `edge_id,bound,baseline`.
pub fn write_agreement_csv<W: Write>(out: W, result: &AgreementResult) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["edge_id", "bound", &result.baseline.to_string()])?;
    for s in &result.samples {
        w.write_record([s.edge_id.to_string(), format_float(s.bound), format_float(s.baseline)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

struct Frame {
    lo_x: f64,
    hi_x: f64,
    lo_y: f64,
    hi_y: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.lo_x) / (self.hi_x - self.lo_x) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.lo_y) / (self.hi_y - self.lo_y) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(svg: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

fn svg_axes(svg: &mut String, f: &Frame) {
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let vx = f.lo_x + t * (f.hi_x - f.lo_x);
        let vy = f.lo_y + t * (f.hi_y - f.lo_y);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="middle">{:.3}</text>"#, f.px(vx), y0 + 16.0, vx);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, f.py(vy) + 4.0, vy);
    }
}

/// Scatter of bound (x) against baseline (y) with the `y = x` reference and
/// the least-squares trend line.
pub fn agreement_scatter_svg(result: &AgreementResult) -> String {
    let values = result.samples.iter().flat_map(|s| [s.bound, s.baseline]);
    let (lo, hi) = padded_range(values);
    let f = Frame { lo_x: lo, hi_x: hi, lo_y: lo, hi_y: hi };
    let mut svg = String::new();
    svg_open(
        &mut svg,
        &format!("{}: edge curvature ({} edges)", result.dataset, result.samples.len()),
        "bound",
        &result.baseline.to_string(),
    );
    svg_axes(&mut svg, &f);
    let _ = writeln!(
        svg,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"><title>y = x</title></line>"##,
        f.px(lo),
        f.py(lo),
        f.px(hi),
        f.py(hi)
    );
    if let Some(t) = result.summary.trend {
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d62728"><title>least-squares trend</title></line>"##,
            f.px(lo),
            f.py(t.intercept + t.slope * lo),
            f.px(hi),
            f.py(t.intercept + t.slope * hi)
        );
    }
    for s in &result.samples {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f77b4" fill-opacity="0.6"/>"##,
            f.px(s.bound),
            f.py(s.baseline)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Two histograms on shared bins, drawn as overlaid translucent bars.
pub fn dual_histogram_svg(title: &str, series: [(&str, &Histogram); 2]) -> String {
    let edges = &series[0].1.edges;
    let max_count = series.iter().flat_map(|(_, h)| h.counts.iter().copied()).max().unwrap_or(0).max(1);
    let f = Frame { lo_x: edges[0], hi_x: edges[edges.len() - 1], lo_y: 0.0, hi_y: max_count as f64 * 1.05 };
    let mut svg = String::new();
    svg_open(&mut svg, title, "edge curvature", "count");
    svg_axes(&mut svg, &f);
    let colors = ["#1f77b4", "#ff7f0e"];
    for (k, (name, h)) in series.iter().enumerate() {
        for (b, &c) in h.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (x0, x1) = (f.px(h.edges[b]), f.px(h.edges[b + 1]));
            let (y0, y1) = (f.py(0.0), f.py(c as f64));
            let _ = writeln!(
                svg,
                r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.45"/>"#,
                x1 - x0,
                y0 - y1,
                colors[k]
            );
        }
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            WIDTH - MARGIN - 90.0,
            MARGIN + 8.0 + 16.0 * k as f64,
            colors[k],
            WIDTH - MARGIN - 74.0,
            MARGIN + 17.0 + 16.0 * k as f64,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn agreement_histogram_svg(result: &AgreementResult) -> String {
    dual_histogram_svg(
        &format!("{}: curvature distribution", result.dataset),
        [("bound", &result.summary.bound_histogram), (result.baseline.as_str(), &result.summary.baseline_histogram)],
    )
}
