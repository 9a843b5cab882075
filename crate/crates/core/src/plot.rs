//! Minimal SVG emitters for curves, heatmaps, and box plots.
//!
//! Output depends only on the inputs: coordinates are printed with fixed
//! precision, so identical data gives byte-identical files.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 14] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn open(svg: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(title)
    );
}

/// Linear map from a data range onto a pixel range.
#[derive(Debug, Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new((d0, d1): (f64, f64), (p0, p1): (f64, f64)) -> Self {
        let (d0, d1) = if d1 > d0 { (d0, d1) } else { (d0 - 0.5, d0 + 0.5) };
        Self { d0, d1, p0, p1 }
    }

    fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn axes(svg: &mut String, x: Scale, y: Scale, x_label: &str, y_label: &str) {
    let (left, right) = (x.p0, x.p1);
    let (bottom, top) = (y.p0, y.p1);
    let _ = writeln!(svg, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(svg, r#"<line x1="{left:.2}" y1="{bottom:.2}" x2="{right:.2}" y2="{bottom:.2}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{left:.2}" y1="{bottom:.2}" x2="{left:.2}" y2="{top:.2}"/>"#);
    let _ = writeln!(svg, "</g>");
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x.d0 + f * (x.d1 - x.d0);
        let yv = y.d0 + f * (y.d1 - y.d0);
        let (px, py) = (x.at(xv), y.at(yv));
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 6.0,
            py + 4.0,
            tick(yv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{left:.2}" y1="{py:.2}" x2="{right:.2}" y2="{py:.2}" stroke="#dddddd" stroke-width="0.5"/>"##
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        bottom + 40.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate({:.2},{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        left - 50.0,
        (top + bottom) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(svg: &mut String, names: &[&str], x: f64, y: f64) {
    for (i, name) in names.iter().enumerate() {
        let yy = y + i as f64 * 18.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#,
            yy - 10.0,
            color(i)
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{yy:.2}">{}</text>"#, x + 18.0, escape(name));
    }
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub struct Series<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Step-free polyline chart, one line per series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>], y_range: Option<(f64, f64)>) -> String {
    let mut svg = String::new();
    open(&mut svg, WIDTH, HEIGHT, title);
    let all = || series.iter().flat_map(|s| s.points.iter());
    let mut xr = data_range(all().map(|p| p.0));
    let mut yr = y_range.unwrap_or_else(|| data_range(all().map(|p| p.1)));
    if !xr.0.is_finite() {
        xr = (0.0, 1.0);
    }
    if !yr.0.is_finite() {
        yr = (0.0, 1.0);
    }
    let x = Scale::new(xr, (MARGIN_LEFT, WIDTH - MARGIN_RIGHT));
    let y = Scale::new(yr, (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP));
    axes(&mut svg, x, y, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(px, py)| format!("{:.2},{:.2}", x.at(px), y.at(py)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            color(i),
            pts.join(" ")
        );
    }
    let names: Vec<&str> = series.iter().map(|s| s.name).collect();
    legend(&mut svg, &names, WIDTH - MARGIN_RIGHT + 15.0, MARGIN_TOP + 10.0);
    svg.push_str("</svg>\n");
    svg
}

/// Square heatmap over `labels` with a diverging scale on [-1, 1].
/// Undefined cells are grey.
pub fn heatmap(title: &str, labels: &[&str], cell: impl Fn(usize, usize) -> Option<f64>) -> String {
    let n = labels.len();
    let size = 34.0;
    let left = 110.0;
    let top = 110.0;
    let width = left + size * n as f64 + 30.0;
    let height = top + size * n as f64 + 30.0;
    let mut svg = String::new();
    open(&mut svg, width, height, title);
    for (j, label) in labels.iter().enumerate() {
        let cx = left + size * (j as f64 + 0.5);
        let _ = writeln!(
            svg,
            r#"<text transform="translate({cx:.2},{:.2}) rotate(-60)">{}</text>"#,
            top - 6.0,
            escape(label)
        );
    }
    for i in 0..n {
        let y = top + size * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y + size / 2.0 + 4.0,
            escape(labels[i])
        );
        for j in 0..n {
            let x = left + size * j as f64;
            let v = cell(i, j);
            let fill = v.map(diverging).unwrap_or_else(|| "#cccccc".into());
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{size:.2}" height="{size:.2}" fill="{fill}" stroke="white"/>"#
            );
            if let Some(v) = v {
                let _ = writeln!(
                    svg,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{v:.2}</text>"#,
                    x + size / 2.0,
                    y + size / 2.0 + 3.0
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Blue for -1 through white at 0 to red for +1.
fn diverging(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
    } else {
        (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One box per group: quartile box, median line, min/max whiskers.
pub fn box_plot(title: &str, y_label: &str, groups: &[(&str, Vec<f64>)]) -> String {
    let mut svg = String::new();
    let width = (MARGIN_LEFT + 40.0 + 46.0 * groups.len() as f64).max(360.0);
    open(&mut svg, width, HEIGHT, title);
    let yr = data_range(groups.iter().flat_map(|(_, v)| v.iter().copied()));
    let yr = if yr.0.is_finite() { (yr.0 - 0.5, yr.1 + 0.5) } else { (0.0, 1.0) };
    let x = Scale::new((0.0, groups.len() as f64), (MARGIN_LEFT, width - 20.0));
    let y = Scale::new(yr, (HEIGHT - MARGIN_BOTTOM - 30.0, MARGIN_TOP));
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        x.p0, y.p0, x.p0, y.p1
    );
    for i in 0..=4 {
        let v = yr.0 + (yr.1 - yr.0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x.p0 - 6.0,
            y.at(v) + 4.0,
            tick(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text transform="translate({:.2},{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        x.p0 - 50.0,
        (y.p0 + y.p1) / 2.0,
        escape(y_label)
    );
    for (i, (name, values)) in groups.iter().enumerate() {
        let cx = x.at(i as f64 + 0.5);
        let _ = writeln!(
            svg,
            r#"<text transform="translate({cx:.2},{:.2}) rotate(45)">{}</text>"#,
            y.p0 + 12.0,
            escape(name)
        );
        let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if sorted.is_empty() {
            continue;
        }
        sorted.sort_by(f64::total_cmp);
        let [lo, q1, med, q3, hi] = [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| y.at(quantile(&sorted, q)));
        let c = color(i);
        let half = 12.0;
        let _ = writeln!(svg, r#"<line x1="{cx:.2}" y1="{lo:.2}" x2="{cx:.2}" y2="{hi:.2}" stroke="{c}"/>"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{q3:.2}" width="{:.2}" height="{:.2}" fill="{c}" fill-opacity="0.35" stroke="{c}"/>"#,
            cx - half,
            2.0 * half,
            (q1 - q3).max(0.5)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{med:.2}" x2="{:.2}" y2="{med:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            cx + half
        );
    }
    svg.push_str("</svg>\n");
    svg
}
