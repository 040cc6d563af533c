//! SVG figures drawn from the CSV outputs. Plots are derived data: they
//! are a pure function of the CSV files they read.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;

use crate::config::{CommandKind, ExperimentConfig};
use crate::run::{bounds_file, profile_file, Outputs, SimulateRow, ThresholdRow, SIMULATE_FILE, THRESHOLD_FILE};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 52.0;
const PALETTE: [&str; 8] = ["#d4a017", "#c0392b", "#2e5cb8", "#27ae60", "#8e44ad", "#e67e22", "#16a085", "#7f8c8d"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
    /// Vertical interval per point.
    pub bars: Vec<(f64, f64)>,
    pub dashed: bool,
    pub markers: bool,
}

impl Series {
    fn new(label: impl Into<String>, color: &str) -> Self {
        Self { label: label.into(), color: color.into(), points: Vec::new(), bars: Vec::new(), dashed: false, markers: true }
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn map(&self, v: f64, a: f64, b: f64) -> f64 {
        let t = if self.log { (v.log10() - self.lo) / (self.hi - self.lo) } else { (v - self.lo) / (self.hi - self.lo) };
        a + t * (b - a)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            (self.lo as i32..=self.hi as i32).map(|e| (10f64.powi(e), format!("1e{e}"))).collect()
        } else {
            (0..=5)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 5.0;
                    (v, format!("{}", (v * 1000.0).round() / 1000.0))
                })
                .collect()
        }
    }

    fn contains(&self, v: f64) -> bool {
        !self.log || v > 0.0
    }
}

fn axes(chart: &Chart) -> (Axis, Axis) {
    let xs: Vec<f64> = chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let (mut xlo, mut xhi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !xlo.is_finite() {
        (xlo, xhi) = (0.0, 1.0);
    } else if xhi - xlo < 1e-12 {
        (xlo, xhi) = (xlo - 0.5, xhi + 0.5);
    }
    let ys: Vec<f64> = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1).chain(s.bars.iter().flat_map(|b| [b.0, b.1])))
        .filter(|y| !chart.log_y || *y > 0.0)
        .collect();
    let y = if chart.log_y {
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            let (lo, hi) = (lo.log10().floor(), hi.log10().ceil());
            Axis { lo, hi: if hi > lo { hi } else { lo + 1.0 }, log: true }
        } else {
            Axis { lo: -6.0, hi: 0.0, log: true }
        }
    } else {
        let hi = ys.iter().copied().fold(0.0, f64::max);
        Axis { lo: 0.0, hi: if hi > 0.0 { hi * 1.05 } else { 1.0 }, log: false }
    };
    (Axis { lo: xlo, hi: xhi, log: false }, y)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(chart: &Chart) -> String {
    let (xa, ya) = axes(chart);
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let px = |x: f64| xa.map(x, left, right);
    let py = |y: f64| ya.map(y, bottom, top);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, (left + right) / 2.0, escape(&chart.title));
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#, right - left, bottom - top);
    for (v, label) in xa.ticks() {
        let x = px(v);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="black"/>"#, bottom + 4.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#, bottom + 16.0);
    }
    for (v, label) in ya.ticks() {
        let y = py(v);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/>"#, left - 4.0);
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, left - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (left + right) / 2.0, HEIGHT - 14.0, escape(&chart.x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (top + bottom) / 2.0,
        escape(&chart.y_label)
    );
    for (k, series) in chart.series.iter().enumerate() {
        let visible: Vec<(f64, f64)> = series.points.iter().copied().filter(|p| ya.contains(p.1)).collect();
        if visible.len() > 1 {
            let path: Vec<String> = visible.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#, path.join(" "), series.color);
        }
        for (i, &(x, y)) in series.points.iter().enumerate() {
            if let Some(&(lo, hi)) = series.bars.get(i) {
                let lo = if ya.log && lo <= 0.0 { 10f64.powf(ya.lo) } else { lo };
                if ya.contains(hi) {
                    let _ = writeln!(
                        s,
                        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{3}"/>"#,
                        px(x),
                        py(lo),
                        py(hi),
                        series.color
                    );
                }
            }
            if series.markers && ya.contains(y) {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#, px(x), py(y), series.color);
            }
        }
        let ly = top + 14.0 * k as f64 + 8.0;
        let _ = writeln!(s, r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{2}" stroke-width="2"/>"#, right + 10.0, right + 28.0, series.color);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, right + 32.0, ly + 4.0, escape(&series.label));
    }
    s.push_str("</svg>\n");
    s
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).with_context(|| format!("missing plot input {}", path.display()))?;
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(file).deserialize() {
        rows.push(row.with_context(|| format!("reading {}", path.display()))?);
    }
    Ok(rows)
}

fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

#[derive(Debug, serde::Deserialize)]
struct BoundRow {
    #[serde(rename = "R_Q")]
    rate: f64,
    pe_lower: f64,
    pe_upper: f64,
}

fn bounds_chart(config: &ExperimentConfig, dir: &Path) -> Result<Chart> {
    let mut series = Vec::new();
    for &eps in &config.parameters {
        for &n in &config.blocklengths {
            let rows: Vec<BoundRow> = read_csv(&dir.join(bounds_file(eps, n)))?;
            let c = color(series.len() / 2);
            let mut upper = Series::new(format!("upper N={n}"), c);
            let mut lower = Series::new(format!("lower N={n}"), c);
            lower.dashed = true;
            upper.markers = false;
            lower.markers = false;
            for r in rows {
                upper.points.push((r.rate, r.pe_upper));
                lower.points.push((r.rate, r.pe_lower));
            }
            series.push(upper);
            series.push(lower);
        }
    }
    Ok(Chart {
        title: "Block error bounds, erasure channel".into(),
        x_label: "quantum rate R_Q".into(),
        y_label: "block error P_e".into(),
        log_y: true,
        series,
    })
}

fn simulate_chart(config: &ExperimentConfig, dir: &Path) -> Result<Chart> {
    let rows: Vec<SimulateRow> = read_csv(&dir.join(SIMULATE_FILE))?;
    let by_parameter = config.parameters.len() > 1;
    let mut series: Vec<Series> = Vec::new();
    for &n in &config.blocklengths {
        let mut s = Series::new(format!("N={n}"), color(series.len()));
        for r in rows.iter().filter(|r| r.n == n && r.branch == "combined") {
            let x = if by_parameter { r.parameter } else { r.r_q };
            s.points.push((x, r.p_hat));
            s.bars.push((r.ci_low, r.ci_high));
        }
        series.push(s);
    }
    Ok(Chart {
        title: format!("Block error, {} channel", config.channel),
        x_label: if by_parameter { "channel parameter".into() } else { "quantum rate R_Q".into() },
        y_label: "block error P_e".into(),
        log_y: true,
        series,
    })
}

fn threshold_chart(config: &ExperimentConfig, dir: &Path) -> Result<Chart> {
    let rows: Vec<ThresholdRow> = read_csv(&dir.join(THRESHOLD_FILE))?;
    let mut series: Vec<Series> = Vec::new();
    for &n in &config.blocklengths {
        let mut s = Series::new(format!("N={n}"), color(series.len()));
        s.points = rows.iter().filter(|r| r.n == n).map(|r| (r.parameter, r.rate)).collect();
        series.push(s);
    }
    let mut reference = Series::new("reference", "black");
    reference.markers = false;
    let mut seen: Vec<(f64, f64)> = rows.iter().map(|r| (r.parameter, r.reference_rate.max(0.0))).collect();
    seen.sort_by(|a, b| a.0.total_cmp(&b.0));
    seen.dedup();
    reference.points = seen;
    series.push(reference);
    Ok(Chart {
        title: format!("Threshold rate for P_e <= {}, {} channel", config.target, config.channel),
        x_label: "channel parameter".into(),
        y_label: "quantum rate R_Q".into(),
        log_y: false,
        series,
    })
}

#[derive(Debug, serde::Deserialize)]
struct ProfileRow {
    index: usize,
    z_value: f64,
}

/// Largest profile drawn point by point.
const MAX_PLOTTED_BLOCKLENGTH: usize = 4096;

fn construct_chart(config: &ExperimentConfig, dir: &Path) -> Result<Chart> {
    let mut series = Vec::new();
    for &x in &config.parameters {
        let spec = qpolar::QuantumChannelSpec::new(config.channel, x)?;
        for &n in config.blocklengths.iter().filter(|&&n| n <= MAX_PLOTTED_BLOCKLENGTH) {
            for branch in ["amplitude", "phase"] {
                let rows: Vec<ProfileRow> = read_csv(&dir.join(profile_file(&spec, n, branch)))?;
                let mut s = Series::new(format!("{branch} N={n}"), color(series.len()));
                // Phase channels are used in reverse order.
                s.points = rows
                    .iter()
                    .map(|r| {
                        let i = if branch == "phase" { n + 1 - r.index } else { r.index };
                        (i as f64, 1.0 - r.z_value)
                    })
                    .collect();
                s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
                series.push(s);
            }
        }
    }
    Ok(Chart {
        title: format!("Virtual channel reliability, {} channel", config.channel),
        x_label: "input index".into(),
        y_label: "1 - Z".into(),
        log_y: false,
        series,
    })
}

pub fn chart_for(config: &ExperimentConfig, dir: &Path) -> Result<Chart> {
    match config.command {
        CommandKind::Construct => construct_chart(config, dir),
        CommandKind::Bounds => bounds_chart(config, dir),
        CommandKind::Simulate => simulate_chart(config, dir),
        CommandKind::Threshold => threshold_chart(config, dir),
    }
}

pub fn plot_name(config: &ExperimentConfig) -> String {
    format!("{}.svg", config.preset.as_deref().unwrap_or(config.command.as_str()))
}

pub fn plot(config: &ExperimentConfig, outputs: &mut Outputs) -> Result<()> {
    let chart = chart_for(config, outputs.dir())?;
    outputs.write(&plot_name(config), render(&chart).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(series: Vec<Series>, log_y: bool) -> Chart {
        Chart { title: "t".into(), x_label: "x".into(), y_label: "y".into(), log_y, series }
    }

    #[test]
    fn empty_chart_has_axes_only() {
        let svg = render(&chart(Vec::new(), true));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<polyline") && !svg.contains("<circle"));
        assert!(svg.contains("1e-6") && svg.contains("1e0"));
    }

    #[test]
    fn log_axis_skips_zero() {
        let mut s = Series::new("a", "red");
        s.points = vec![(0.1, 0.0), (0.2, 1e-3), (0.3, 1e-2)];
        let svg = render(&chart(vec![s], true));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("1e-3") && svg.contains("1e-2"));
    }

    #[test]
    fn escapes_text() {
        let svg = render(&chart(vec![Series::new("P_e <= 1e-4", "red")], false));
        assert!(svg.contains("P_e &lt;= 1e-4"));
    }
}
