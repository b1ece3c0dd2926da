//! Minimal deterministic SVG line plots: data as markers or a polyline,
//! fitted models as overlaid curves.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    pub color: &'static str,
}

impl Series {
    pub fn data(label: &str, x: &[f64], y: &[f64]) -> Self {
        Self {
            label: label.to_string(),
            points: x.iter().copied().zip(y.iter().copied()).collect(),
            style: if x.len() > 200 { Style::Line } else { Style::Markers },
            color: "#1f5fa8",
        }
    }

    pub fn model(label: &str, x: &[f64], f: impl Fn(f64) -> f64) -> Self {
        Self {
            label: label.to_string(),
            points: x.iter().map(|&x| (x, f(x))).collect(),
            style: Style::Line,
            color: "#c0392b",
        }
    }
}

fn bounds(series: &[Series]) -> Option<(f64, f64, f64, f64)> {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return None;
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    Some((x0, x1, y0 - pad, y1 + pad))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the series on shared axes.
pub fn render(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (pw, ph) = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT, HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let Some((x0, x1, y0, y1)) = bounds(series) else {
        svg.push_str("</svg>\n");
        return svg;
    };
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + ph - (y - y0) / (y1 - y0) * ph;
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.4}</text>"#,
            sx(xv),
            MARGIN_TOP + ph + 16.0,
            xv
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.4e}</text>"#,
            MARGIN_LEFT - 4.0,
            sy(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).copied().collect();
        match s.style {
            Style::Line => {
                let mut d = String::new();
                for (x, y) in &pts {
                    let _ = write!(d, "{:.2},{:.2} ", sx(*x), sy(*y));
                }
                let _ = writeln!(
                    svg,
                    r#"<polyline class="series" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                    s.color,
                    d.trim_end()
                );
            }
            Style::Markers => {
                for (x, y) in &pts {
                    let _ = writeln!(
                        svg,
                        r#"<circle class="series" cx="{:.2}" cy="{:.2}" r="2" fill="{}"/>"#,
                        sx(*x),
                        sy(*y),
                        s.color
                    );
                }
            }
        }
        let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{ly:.2}" text-anchor="end" fill="{}">{}</text>"#,
            MARGIN_LEFT + pw - 6.0,
            s.color,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_data_and_fit() {
        let x = [0.0, 1.0, 2.0];
        let svg = render("t", "x", "y", &[Series::data("data", &x, &[1.0, 3.0, 1.0]), Series::model("fit", &x, |x| x)]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(">fit<"));
    }

    #[test]
    fn empty_series_still_valid() {
        let svg = render("t", "x", "y", &[]);
        assert!(svg.ends_with("</svg>\n"));
    }
}
