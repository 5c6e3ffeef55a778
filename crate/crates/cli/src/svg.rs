//! Minimal SVG writers: a field heatmap and a log-log line chart.

use std::fmt::Write as _;

/// Colour scale of a heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// `log10 |v|`, clipped `DECADES` below the peak.
    Log,
    Linear,
}

const DECADES: f64 = 12.0;
/// Displayed cells per axis; larger grids are block-reduced by max |v|.
const MAX_CELLS: usize = 256;

// viridis anchors
const PALETTE: [[f64; 3]; 6] = [
    [68.0, 1.0, 84.0],
    [65.0, 68.0, 135.0],
    [42.0, 120.0, 142.0],
    [34.0, 168.0, 132.0],
    [122.0, 209.0, 81.0],
    [253.0, 231.0, 37.0],
];

fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (PALETTE.len() - 1) as f64;
    let k = (t.floor() as usize).min(PALETTE.len() - 2);
    let f = t - k as f64;
    let c: Vec<u8> = (0..3).map(|i| (PALETTE[k][i] + f * (PALETTE[k + 1][i] - PALETTE[k][i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn fmt(v: f64) -> String {
    format!("{v:.3e}")
}

/// Heatmap of row-major samples (`ny` rows of `nx` values, eta increasing
/// upwards in the picture).
pub fn heatmap(values: &[f64], nx: usize, ny: usize, scale: Scale, title: &str) -> String {
    assert_eq!(values.len(), nx * ny);
    let (bx, by) = (nx.div_ceil(MAX_CELLS), ny.div_ceil(MAX_CELLS));
    let (cx, cy) = (nx.div_ceil(bx), ny.div_ceil(by));
    let mut cells = vec![0.0f64; cx * cy];
    for j in 0..ny {
        for i in 0..nx {
            let c = &mut cells[(j / by) * cx + i / bx];
            let v = values[j * nx + i];
            if v.abs() > c.abs() {
                *c = v;
            }
        }
    }
    let peak = cells.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (lo, hi) = match scale {
        Scale::Log => (peak.log10() - DECADES, peak.log10()),
        Scale::Linear => (cells.iter().cloned().fold(0.0, f64::min), peak),
    };
    let norm = |v: f64| {
        let t = match scale {
            Scale::Log => {
                if v.abs() > 0.0 {
                    v.abs().log10()
                } else {
                    lo
                }
            }
            Scale::Linear => v,
        };
        if hi > lo {
            (t - lo) / (hi - lo)
        } else {
            0.0
        }
    };

    let px = 512.0 / cx.max(cy) as f64;
    let (w, h) = (px * cx as f64, px * cy as f64);
    let (left, top) = (40.0, 30.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" shape-rendering="crispEdges">"#,
        left + w + 110.0,
        top + h + 40.0
    );
    let _ = writeln!(s, r#"<text x="{left}" y="20" font-family="sans-serif" font-size="14">{title}</text>"#);
    for j in 0..cy {
        for i in 0..cx {
            let y = top + h - (j + 1) as f64 * px;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                left + i as f64 * px,
                y,
                px,
                px,
                colour(norm(cells[j * cx + i]))
            );
        }
    }
    let _ = writeln!(s, r#"<text x="{left}" y="{}" font-family="sans-serif" font-size="12">xi</text>"#, top + h + 20.0);
    let _ = writeln!(s, r#"<text x="10" y="{}" font-family="sans-serif" font-size="12">eta</text>"#, top + h / 2.0);
    // colour bar
    let bar_x = left + w + 20.0;
    for k in 0..64 {
        let t = k as f64 / 63.0;
        let _ = writeln!(
            s,
            r#"<rect x="{bar_x}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            top + h - (k + 1) as f64 * h / 64.0,
            h / 64.0,
            colour(t)
        );
    }
    let label = |v: f64| match scale {
        Scale::Log => format!("1e{v:.1}"),
        Scale::Linear => fmt(v),
    };
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#, bar_x + 20.0, top + 10.0, label(hi));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#, bar_x + 20.0, top + h, label(lo));
    s.push_str("</svg>\n");
    s
}

/// Log-log chart of sample points `(x, y)` with a fitted curve.
pub fn line_chart(title: &str, x_label: &str, samples: &[(f64, f64)], fit: &[(f64, f64)]) -> String {
    let all: Vec<(f64, f64)> = samples.iter().chain(fit).map(|&(x, y)| (x.log10(), y.log10())).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = |a: f64, b: f64| if b - a > 0.0 { 0.05 * (b - a) } else { 0.5 };
    let (px, py) = (pad(x0, x1), pad(y0, y1));
    let (x0, x1, y0, y1) = (x0 - px, x1 + px, y0 - py, y1 + py);
    let (left, top, w, h) = (70.0, 30.0, 480.0, 320.0);
    let map = |(x, y): (f64, f64)| {
        (left + (x.log10() - x0) / (x1 - x0) * w, top + h - (y.log10() - y0) / (y1 - y0) * h)
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}">"#, left + w + 20.0, top + h + 50.0);
    let _ = writeln!(s, r#"<text x="{left}" y="20" font-family="sans-serif" font-size="14">{title}</text>"#);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
    if !fit.is_empty() {
        let pts: Vec<String> = fit.iter().map(|&p| map(p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, pts.join(" "));
    }
    for &p in samples {
        let (x, y) = map(p);
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="crimson"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10">{}</text>"#,
            x + 6.0,
            y - 6.0,
            fmt(p.1)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{x_label} (log, 10^{:.2} .. 10^{:.2})</text>"#,
        left,
        top + h + 30.0,
        x0,
        x1
    );
    let _ = writeln!(
        s,
        r#"<text x="5" y="{}" font-family="sans-serif" font-size="12">norm (log)</text>"#,
        top + h / 2.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_ends() {
        assert_eq!(colour(0.0), "#440154");
        assert_eq!(colour(1.0), "#fde725");
        assert_eq!(colour(2.0), "#fde725");
    }

    #[test]
    fn heatmap_reduces_large_grids() {
        let n = 600;
        let v: Vec<f64> = (0..n * n).map(|k| (k % n) as f64).collect();
        let svg = heatmap(&v, n, n, Scale::Linear, "t");
        assert_eq!(svg.matches("<rect").count(), 200 * 200 + 64);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn chart_contains_every_sample() {
        let svg = line_chart("t", "eps", &[(1e-2, 1.0), (1e-3, 3.0), (1e-4, 10.0)], &[(1e-2, 1.0), (1e-4, 10.0)]);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
