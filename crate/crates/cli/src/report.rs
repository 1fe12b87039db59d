//! CSV tables and self-contained SVG plots.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::pipeline::MethodRun;

/// One metrics row; every emitted table carries the config hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: String,
    pub dataset: String,
    pub seed: u64,
    pub res: usize,
    pub alpha: f64,
    pub acc: f64,
    pub ari: f64,
    pub nmi: f64,
    pub max_share: f64,
    pub collapsed: bool,
    pub config_hash: String,
    /// Wall-clock seconds; shown on the terminal but kept out of files so
    /// they stay reproducible.
    #[serde(skip)]
    pub runtime_s: f64,
}

impl MetricRow {
    pub fn new(method: &str, dataset: &str, seed: u64, res: usize, alpha: f64, run: &MethodRun, hash: &str) -> Self {
        Self {
            method: method.into(),
            dataset: dataset.into(),
            seed,
            res,
            alpha,
            acc: run.scores.acc,
            ari: run.scores.ari,
            nmi: run.scores.nmi,
            max_share: run.max_share,
            collapsed: run.collapsed(),
            runtime_s: run.runtime_s,
            config_hash: hash.into(),
        }
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Fixed-width text table for terminal output.
pub fn format_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push('\n');
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    log_x: bool,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>, log_x: bool) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let mut xs = xs.map(|x| if log_x { x.log2() } else { x });
        let (mut x, mut y) = (span(&mut xs), span(&mut ys.into_iter()));
        for r in [&mut x, &mut y] {
            if !r.0.is_finite() {
                *r = (0.0, 1.0);
            }
            if r.1 - r.0 < 1e-12 {
                *r = (r.0 - 0.5, r.1 + 0.5);
            }
            let pad = 0.05 * (r.1 - r.0);
            *r = (r.0 - pad, r.1 + pad);
        }
        Self { x, y, log_x }
    }

    fn px(&self, x: f64) -> f64 {
        let x = if self.log_x { x.log2() } else { x };
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(svg: &mut String, title: &str, data: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, "<!-- data\n{}\n-->", data.replace("--", "- -"));
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn axes(svg: &mut String, f: &Frame, xticks: &[f64]) {
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
    let _ = writeln!(svg, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#);
    for &t in xticks {
        let x = f.px(t);
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y0 + 16.0, fmt_num(t));
    }
    for i in 0..=4 {
        let v = f.y.0 + (f.y.1 - f.y.0) * i as f64 / 4.0;
        let y = f.py(v);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, y + 4.0, fmt_num(v));
        let _ = writeln!(svg, r##"<path d="M{x0},{y:.1} L{x1},{y:.1}" stroke="#eee"/>"##);
    }
}

fn fmt_num(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// A line with a shaded ±std band.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub mid: Vec<f64>,
    pub spread: Vec<f64>,
}

/// Median lines with shaded spread; `log_x` spaces the x axis by powers of two.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log_x: bool) -> String {
    let mut data = String::from("series,x,mid,spread");
    for s in series {
        for i in 0..s.x.len() {
            let _ = write!(data, "\n{},{},{},{}", s.name, s.x[i], s.mid[i], s.spread[i]);
        }
    }
    let f = Frame::new(
        series.iter().flat_map(|s| s.x.iter().copied()),
        series.iter().flat_map(|s| s.mid.iter().zip(&s.spread).flat_map(|(m, d)| [m - d, m + d])),
        log_x,
    );
    let mut svg = String::new();
    open(&mut svg, title, &data, xlabel, ylabel);
    let mut xticks: Vec<f64> = series.iter().flat_map(|s| s.x.iter().copied()).collect();
    xticks.sort_by(f64::total_cmp);
    xticks.dedup();
    axes(&mut svg, &f, &xticks);
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let upper: Vec<String> = (0..s.x.len()).map(|i| format!("{:.1},{:.1}", f.px(s.x[i]), f.py(s.mid[i] + s.spread[i]))).collect();
        let lower: Vec<String> =
            (0..s.x.len()).rev().map(|i| format!("{:.1},{:.1}", f.px(s.x[i]), f.py(s.mid[i] - s.spread[i]))).collect();
        let _ = writeln!(svg, r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, upper.join(" "), lower.join(" "));
        let pts: Vec<String> = (0..s.x.len()).map(|i| format!("{:.1},{:.1}", f.px(s.x[i]), f.py(s.mid[i]))).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        for p in &pts {
            let (x, y) = p.split_once(',').unwrap();
            let _ = writeln!(svg, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
        let ly = MARGIN + 16.0 * si as f64;
        let _ = writeln!(svg, r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/>"#, W - MARGIN - 110.0, ly - 9.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, W - MARGIN - 95.0, escape(&s.name));
    }
    svg.push_str("</svg>\n");
    svg
}

/// 2-D scatter coloured by cluster label.
pub fn scatter_plot(title: &str, points: &[(f64, f64)], labels: &[usize]) -> String {
    let mut data = String::from("x,y,label");
    for ((x, y), l) in points.iter().zip(labels) {
        let _ = write!(data, "\n{x},{y},{l}");
    }
    let f = Frame::new(points.iter().map(|p| p.0), points.iter().map(|p| p.1), false);
    let mut svg = String::new();
    open(&mut svg, title, &data, "PC 1", "PC 2");
    axes(&mut svg, &f, &[f.x.0 + 0.05 * (f.x.1 - f.x.0) / 1.1, f.x.1 - 0.05 * (f.x.1 - f.x.0) / 1.1]);
    for ((x, y), &l) in points.iter().zip(labels) {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{}" fill-opacity="0.8"/>"#,
            f.px(*x),
            f.py(*y),
            PALETTE[l % PALETTE.len()]
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Data rows embedded in an SVG produced by this module.
pub fn embedded_data(svg: &str) -> Option<Vec<&str>> {
    let start = svg.find("<!-- data\n")? + "<!-- data\n".len();
    let end = start + svg[start..].find("\n-->")?;
    Some(svg[start..end].lines().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_embeds_data() {
        let s = Series { name: "acc".into(), x: vec![4.0, 64.0], mid: vec![0.5, 0.7], spread: vec![0.1, 0.05] };
        let svg = line_plot("t", "res", "ACC", &[s], true);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        let rows = embedded_data(&svg).unwrap();
        assert_eq!(rows, vec!["series,x,mid,spread", "acc,4,0.5,0.1", "acc,64,0.7,0.05"]);
    }

    #[test]
    fn scatter_handles_degenerate_input() {
        let svg = scatter_plot("s", &[(1.0, 1.0), (1.0, 1.0)], &[0, 1]);
        assert_eq!(embedded_data(&svg).unwrap().len(), 3);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let row = MetricRow {
            method: "sno".into(),
            dataset: "ode6".into(),
            seed: 1,
            res: 64,
            alpha: 1.0,
            acc: 0.5,
            ari: 0.25,
            nmi: 0.3,
            max_share: 0.2,
            collapsed: false,
            config_hash: "abc".into(),
            runtime_s: 0.0,
        };
        write_csv(&p, std::slice::from_ref(&row)).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("method,dataset,seed,res,alpha,acc,ari,nmi,max_share,collapsed,config_hash\n"));
        assert_eq!(read_csv::<MetricRow>(&p).unwrap(), vec![row]);
    }

    #[test]
    fn table_alignment() {
        let t = format_table(&["a", "bb"], &[vec!["xxx".into(), "y".into()]]);
        assert_eq!(t, "a    bb\nxxx  y");
    }
}
