//! Static SVG overlays of original, reconstruction and error.

use std::fmt::Write;

const WIDTH: f64 = 900.0;
const PANEL: f64 = 220.0;
const MARGIN: f64 = 40.0;

fn polyline(values: &[f64], lo: f64, hi: f64, top: f64, colour: &str) -> String {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let step = (WIDTH - 2.0 * MARGIN) / (values.len().max(2) - 1) as f64;
    let mut points = String::new();
    for (i, v) in values.iter().enumerate() {
        let x = MARGIN + step * i as f64;
        let y = top + PANEL - (v - lo) / span * PANEL;
        let _ = write!(points, "{x:.2},{y:.2} ");
    }
    format!(
        "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1\" points=\"{}\"/>\n",
        points.trim_end()
    )
}

fn range(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Original (black) and reconstruction (blue) in the upper panel, error (red) below.
pub fn window_svg(title: &str, original: &[f64], reconstructed: &[f64]) -> String {
    let error: Vec<f64> = original
        .iter()
        .zip(reconstructed)
        .map(|(a, b)| a - b)
        .collect();
    let (lo0, hi0) = range(original);
    let (lo1, hi1) = range(reconstructed);
    let (lo, hi) = (lo0.min(lo1), hi0.max(hi1));
    let (elo, ehi) = range(&error);
    let emax = elo.abs().max(ehi.abs()).max(1e-9);
    let height = 2.0 * PANEL + 3.0 * MARGIN;
    let lower = 2.0 * MARGIN + PANEL;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" \
         viewBox=\"0 0 {WIDTH} {height}\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{MARGIN}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        MARGIN * 0.6,
        escape(title)
    );
    svg.push_str(&polyline(original, lo, hi, MARGIN, "black"));
    svg.push_str(&polyline(reconstructed, lo, hi, MARGIN, "blue"));
    let _ = writeln!(
        svg,
        "<text x=\"{MARGIN}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"12\">error (max {emax:.2})</text>",
        lower - 6.0
    );
    svg.push_str(&polyline(&error, -emax, emax, lower, "red"));
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_traces() {
        let svg = window_svg("a<b", &[0.0, 1.0, 0.0], &[0.0, 0.5, 0.0]);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains("stroke=\"red\""));
    }

    #[test]
    fn flat_input_does_not_divide_by_zero() {
        let svg = window_svg("flat", &[1.0; 4], &[1.0; 4]);
        assert!(!svg.contains("NaN"));
    }
}
