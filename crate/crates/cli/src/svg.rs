//! Bare-bones SVG: line plots and a heatmap with overlaid polylines.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#555555"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = (f64, f64)> + 'a) -> Frame {
        let mut f = Frame {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (x, y) in points.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        if !(f.x1 > f.x0) {
            (f.x0, f.x1) = (f.x0.min(0.0) - 0.5, f.x1.max(0.0) + 0.5);
        }
        if !(f.y1 > f.y0) {
            (f.y0, f.y1) = (f.y0.min(0.0) - 0.5, f.y1.max(0.0) + 0.5);
        }
        f
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn open(title: &str, f: &Frame, x_label: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    )
    .unwrap();
    writeln!(s, r#"<text x="{PAD}" y="{}">{:.4}</text>"#, H - PAD + 16.0, f.x0).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, W - PAD, H - PAD + 16.0, f.x1).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(x_label)).unwrap();
    writeln!(s, r#"<text x="4" y="{}">{:.4}</text>"#, H - PAD, f.y0).unwrap();
    writeln!(s, r#"<text x="4" y="{}">{:.4}</text>"#, PAD + 10.0, f.y1).unwrap();
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(s: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str) {
    let mut pts = String::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x.is_finite() && y.is_finite() {
            write!(pts, "{:.2},{:.2} ", f.px(x), f.py(y)).unwrap();
        }
    }
    writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#, pts.trim_end()).unwrap();
}

/// One curve per `(name, y)`, all sharing `x`.
pub fn line_plot(title: &str, x_label: &str, x: &[f64], curves: &[(&str, &[f64])]) -> String {
    let f = Frame::fit(curves.iter().flat_map(|(_, y)| x.iter().copied().zip(y.iter().copied())));
    let mut s = open(title, &f, x_label);
    for (k, (name, y)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        polyline(&mut s, &f, x, y, color);
        writeln!(s, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, W - PAD - 120.0, PAD + 16.0 * (k + 1) as f64, escape(name)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Row-major `values[j * n_x + i]` over `[x0, x1] x [y0, y1]`, grey scale
/// between the finite min and max, with polylines drawn on top.
#[allow(clippy::too_many_arguments)]
pub fn heatmap(
    title: &str,
    values: &[f64],
    n_x: usize,
    n_y: usize,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    lines: &[Vec<(f64, f64)>],
) -> String {
    let f = Frame { x0, x1, y0, y1 };
    let mut s = open(title, &f, "t");
    let (lo, hi) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    // at most 160 x 160 cells
    let (bx, by) = (n_x.div_ceil(160).max(1), n_y.div_ceil(160).max(1));
    let (cw, ch) = ((x1 - x0) / n_x as f64, (y1 - y0) / n_y as f64);
    for j in (0..n_y).step_by(by) {
        for i in (0..n_x).step_by(bx) {
            let v = values[j * n_x + i];
            let g = if v.is_finite() { (255.0 * (v - lo) / span).round() as u8 } else { 0 };
            let (cx, cy) = (x0 + i as f64 * cw, y0 + (j + by) as f64 * ch);
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                f.px(cx),
                f.py(cy.min(y1)),
                f.px(cx + bx as f64 * cw) - f.px(cx),
                f.py(y0 + j as f64 * ch) - f.py(cy.min(y1)),
            )
            .unwrap();
        }
    }
    for line in lines {
        let (xs, ys): (Vec<f64>, Vec<f64>) = line.iter().copied().unzip();
        polyline(&mut s, &f, &xs, &ys, "#d62728");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let x = [0.0, 1.0, 2.0];
        let s = line_plot("a < b", "t", &x, &[("y", &[1.0, f64::NAN, 3.0])]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }

    #[test]
    fn heatmap_draws_every_cell_of_small_fields() {
        let s = heatmap("f", &[0.0, 1.0, 2.0, 3.0], 2, 2, (0.0, 1.0), (0.0, 1.0), &[vec![(0.5, 0.5), (0.6, 0.6)]]);
        assert_eq!(s.matches("<rect").count(), 2 + 4);
    }
}
