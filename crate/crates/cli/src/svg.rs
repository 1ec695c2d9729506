//! Minimal hand-rolled SVG histogram with a fitted normal density overlay.

use std::fmt::Write;

use crate::stats;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

/// Renders a density-normalized histogram of an (already standardized)
/// sample with the standard normal curve drawn on top.
pub fn histogram_svg(zs: &[f64], bins: usize, title: &str) -> String {
    let lo = -4.0f64;
    let hi = 4.0f64;
    let bin_w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &z in zs {
        if z >= lo && z < hi {
            counts[((z - lo) / bin_w) as usize] += 1;
        }
    }
    let total = zs.len() as f64;
    let densities: Vec<f64> = counts.iter().map(|&c| c as f64 / (total * bin_w)).collect();
    let peak = densities
        .iter()
        .cloned()
        .fold(stats::normal_density(0.0), f64::max)
        * 1.1;

    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |v: f64| MARGIN + (v - lo) / (hi - lo) * plot_w;
    let y = |d: f64| HEIGHT - MARGIN - d / peak * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        WIDTH / 2.0,
        title
    );
    for (i, &d) in densities.iter().enumerate() {
        let bx = x(lo + i as f64 * bin_w);
        let by = y(d);
        let bh = HEIGHT - MARGIN - by;
        let bw = plot_w / bins as f64;
        let _ = writeln!(
            s,
            "<rect x=\"{bx:.2}\" y=\"{by:.2}\" width=\"{bw:.2}\" height=\"{bh:.2}\" fill=\"#88aadd\" stroke=\"#446699\" stroke-width=\"0.5\"/>"
        );
    }
    let mut path = String::new();
    for i in 0..=200 {
        let v = lo + (hi - lo) * i as f64 / 200.0;
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(path, "{}{:.2},{:.2} ", cmd, x(v), y(stats::normal_density(v)));
    }
    let _ = writeln!(s, "<path d=\"{path}\" fill=\"none\" stroke=\"#cc3333\" stroke-width=\"1.5\"/>");
    // axis
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        MARGIN,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN
    );
    for tick in [-4.0, -2.0, 0.0, 2.0, 4.0] {
        let tx = x(tick);
        let _ = writeln!(
            s,
            "<line x1=\"{tx:.2}\" y1=\"{}\" x2=\"{tx:.2}\" y2=\"{}\" stroke=\"black\"/>",
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{tx:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{tick}</text>",
            HEIGHT - MARGIN + 18.0
        );
    }
    s.push_str("</svg>\n");
    s
}
