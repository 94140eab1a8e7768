//! Minimal static SVG figures.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dots,
}

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub style: Style,
    /// Polyline segments; NaN entries are skipped.
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn header(s: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
}

fn axes(s: &mut String, f: &Frame) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, f.px(xv), y0 + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 4.0, f.py(yv) + 4.0, tick(yv));
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_plot(p: &Plot) -> String {
    let all = || p.series.iter().flat_map(|s| s.points.iter());
    let f = Frame {
        x: bounds(all().map(|q| q.0)),
        y: bounds(all().map(|q| q.1)),
    };
    let mut s = String::new();
    header(&mut s, &p.title, &p.x_label, &p.y_label);
    axes(&mut s, &f);
    for (k, ser) in p.series.iter().enumerate() {
        match ser.style {
            Style::Line => {
                let mut path = String::new();
                let mut pen_up = true;
                for &(x, y) in &ser.points {
                    if !(x.is_finite() && y.is_finite()) {
                        pen_up = true;
                        continue;
                    }
                    let _ = write!(path, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, f.px(x), f.py(y));
                    pen_up = false;
                }
                let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#, path.trim_end(), ser.color);
            }
            Style::Dots => {
                for &(x, y) in ser.points.iter().filter(|q| q.0.is_finite() && q.1.is_finite()) {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{}"/>"#, f.px(x), f.py(y), ser.color);
                }
            }
        }
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#, W - RIGHT - 150.0, ly - 9.0, ser.color);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, W - RIGHT - 135.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

/// Cells on a regular grid coloured by a small integer class.
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub nx: usize,
    pub ny: usize,
    pub x: (f64, f64),
    pub y: (f64, f64),
    /// Row-major, x fastest; `None` draws grey.
    pub classes: Vec<Option<usize>>,
    pub legend: Vec<(usize, String)>,
}

pub fn heatmap(h: &Heatmap) -> String {
    let f = Frame {
        x: if h.x.1 > h.x.0 { h.x } else { (h.x.0 - 0.5, h.x.0 + 0.5) },
        y: if h.y.1 > h.y.0 { h.y } else { (h.y.0 - 0.5, h.y.0 + 0.5) },
    };
    let mut s = String::new();
    header(&mut s, &h.title, &h.x_label, &h.y_label);
    let cw = (W - LEFT - RIGHT) / h.nx as f64;
    let ch = (H - TOP - BOTTOM) / h.ny as f64;
    for iy in 0..h.ny {
        for ix in 0..h.nx {
            let color = match h.classes[iy * h.nx + ix] {
                Some(c) => PALETTE[(c / 2) % PALETTE.len()],
                None => "#999999",
            };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                LEFT + ix as f64 * cw,
                H - BOTTOM - (iy + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    axes(&mut s, &f);
    for (k, (c, label)) in h.legend.iter().enumerate() {
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}" stroke="white"/>"#,
            W - RIGHT - 110.0,
            ly - 9.0,
            PALETTE[(c / 2) % PALETTE.len()]
        );
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="white">{}</text>"#, W - RIGHT - 95.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_lift_the_pen() {
        let p = Plot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "a<b".into(),
                color: PALETTE[0],
                style: Style::Line,
                points: vec![(0.0, 0.0), (1.0, 1.0), (2.0, f64::NAN), (3.0, 0.5), (4.0, 0.2)],
            }],
        };
        let svg = line_plot(&p);
        assert_eq!(svg.matches('M').count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn degenerate_ranges_do_not_divide_by_zero() {
        let h = Heatmap {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            nx: 2,
            ny: 1,
            x: (0.0, 1.0),
            y: (0.0, 0.0),
            classes: vec![Some(1), None],
            legend: vec![(1, "1".into())],
        };
        assert!(!heatmap(&h).contains("NaN"));
    }
}
