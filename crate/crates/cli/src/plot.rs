//! Reward curves as standalone SVG.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qrlnas_core::rl::RewardLog;
use qrlnas_core::{Error, Result};

pub const DEFAULT_WINDOW: usize = 50;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Trailing mean over up to `window` points.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

struct Line {
    label: String,
    color: &'static str,
    opacity: f64,
    points: Vec<(f64, f64)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Draws each named log. A single log shows raw rewards plus their moving
/// average; several logs overlay one moving-average line each.
pub fn render_svg(series: &[(String, RewardLog)], window: usize) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Config("nothing to plot".into()));
    }
    if window == 0 {
        return Err(Error::Config("smoothing window must be positive".into()));
    }
    let mut lines = Vec::new();
    for (i, (name, log)) in series.iter().enumerate() {
        if log.is_empty() {
            return Err(Error::Config(format!(
                "{name}: reward log has no data rows"
            )));
        }
        let xs: Vec<f64> = log.records().iter().map(|r| r.episode as f64).collect();
        let ys: Vec<f64> = log.records().iter().map(|r| r.total_reward).collect();
        let color = PALETTE[i % PALETTE.len()];
        let smooth = moving_average(&ys, window);
        if series.len() == 1 {
            lines.push(Line {
                label: format!("{name} (raw)"),
                color,
                opacity: 0.3,
                points: xs.iter().cloned().zip(ys).collect(),
            });
            lines.push(Line {
                label: format!("{name} (mean of {window})"),
                color,
                opacity: 1.0,
                points: xs.into_iter().zip(smooth).collect(),
            });
        } else {
            lines.push(Line {
                label: name.clone(),
                color,
                opacity: 1.0,
                points: xs.into_iter().zip(smooth).collect(),
            });
        }
    }

    let all = lines.iter().flat_map(|l| l.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let frame = Frame { x0, x1, y0, y1 };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (bx, by) = (HEIGHT - BOTTOM, WIDTH - RIGHT);
    writeln!(
        svg,
        r##"<path d="M{LEFT} {TOP} V{bx} H{by}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = frame.x0 + t * (frame.x1 - frame.x0);
        let yv = frame.y0 + t * (frame.y1 - frame.y0);
        let (px, py) = (frame.px(xv), frame.py(yv));
        writeln!(
            svg,
            r##"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            bx + 18.0,
            tick(xv)
        )
        .unwrap();
        writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 6.0,
            py + 4.0,
            tick(yv)
        )
        .unwrap();
        writeln!(svg, r##"<path d="M{LEFT} {py:.2} H{by}" stroke="#ddd"/>"##).unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">episode</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 8.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">total reward</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0
    )
    .unwrap();

    for line in &lines {
        if line.points.len() == 1 {
            let (x, y) = line.points[0];
            writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{}" fill-opacity="{}"/>"#,
                frame.px(x),
                frame.py(y),
                line.color,
                line.opacity
            )
            .unwrap();
        } else {
            let pts: Vec<String> = line
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
                .collect();
            writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-opacity="{}" stroke-width="1.5"/>"#,
                pts.join(" "),
                line.color,
                line.opacity
            )
            .unwrap();
        }
    }
    for (i, line) in lines.iter().enumerate() {
        let y = TOP + 14.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT - 220.0;
        writeln!(
            svg,
            r#"<g class="legend"><rect x="{x:.2}" y="{:.2}" width="14" height="4" fill="{}" fill-opacity="{}"/><text x="{:.2}" y="{y:.2}">{}</text></g>"#,
            y - 6.0,
            line.color,
            line.opacity,
            x + 20.0,
            escape(&line.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Reads reward CSVs and writes one SVG chart.
pub fn plot_rewards(csvs: &[PathBuf], out: &Path, window: usize) -> Result<()> {
    let mut series = Vec::with_capacity(csvs.len());
    for path in csvs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let log = RewardLog::from_csv(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        series.push((stem(path), log));
    }
    std::fs::write(out, render_svg(&series, window)?)?;
    Ok(())
}
