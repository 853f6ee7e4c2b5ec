//! Minimal self-contained SVG output for scatter and box plots.

use std::fmt::Write as _;

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// `[min, max]` widened by 5% on each side; degenerate ranges get unit width.
pub fn padded_range(values: &[f64]) -> (f64, f64) {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi <= lo {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

pub struct Canvas {
    width: f64,
    height: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

impl Canvas {
    pub fn new(width: u32, height: u32, title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            width as f64 / 2.0,
            escape(title)
        );
        Self {
            width: width as f64,
            height: height as f64,
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            body,
        }
    }

    fn sx(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        MARGIN_LEFT + (x - lo) / (hi - lo) * (self.width - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        self.height - MARGIN_BOTTOM - (y - lo) / (hi - lo) * (self.height - MARGIN_TOP - MARGIN_BOTTOM)
    }

    /// Draws both axes with five ticks each. `x_label` empty suppresses x ticks.
    pub fn axes(&mut self, x_range: (f64, f64), y_range: (f64, f64), x_label: &str, y_label: &str) {
        self.x_range = x_range;
        self.y_range = y_range;
        let (x0, x1) = (MARGIN_LEFT, self.width - MARGIN_RIGHT);
        let (y0, y1) = (self.height - MARGIN_BOTTOM, MARGIN_TOP);
        let b = &mut self.body;
        let _ = writeln!(b, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y0:.1}" stroke="black"/>"#);
        let _ = writeln!(b, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}" stroke="black"/>"#);
        for t in 0..5 {
            let f = t as f64 / 4.0;
            let yv = y_range.0 + f * (y_range.1 - y_range.0);
            let py = self.sy(yv);
            let _ = writeln!(
                self.body,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
                x0 - 6.0,
                py + 3.0,
                fmt_tick(yv)
            );
            if !x_label.is_empty() {
                let xv = x_range.0 + f * (x_range.1 - x_range.0);
                let px = self.sx(xv);
                let _ = writeln!(
                    self.body,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
                    px,
                    y0 + 14.0,
                    fmt_tick(xv)
                );
            }
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
            (x0 + x1) / 2.0,
            self.height - 12.0,
            escape(x_label)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="16" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {:.1})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], color: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", self.sx(x), self.sy(y))).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    pub fn point(&mut self, x: f64, y: f64, color: &str, label: &str) {
        let (px, py) = (self.sx(x), self.sy(y));
        let _ = writeln!(self.body, r#"<circle cx="{px:.1}" cy="{py:.1}" r="4" fill="{color}"/>"#);
        let _ = writeln!(
            self.body,
            r#"<text x="{:.1}" y="{:.1}" font-size="10">{}</text>"#,
            px + 6.0,
            py - 4.0,
            escape(label)
        );
    }

    /// One box per group at evenly spaced slots; whiskers span min..max.
    pub fn boxes(&mut self, groups: &[(String, BoxStats)]) {
        let n = groups.len().max(1) as f64;
        let slot = (self.width - MARGIN_LEFT - MARGIN_RIGHT) / n;
        for (i, (label, s)) in groups.iter().enumerate() {
            let cx = MARGIN_LEFT + slot * (i as f64 + 0.5);
            let half = (slot * 0.3).min(30.0);
            let (ymin, yq1, ymed, yq3, ymax) = (self.sy(s.min), self.sy(s.q1), self.sy(s.median), self.sy(s.q3), self.sy(s.max));
            let b = &mut self.body;
            let _ = writeln!(b, r#"<line x1="{cx:.1}" y1="{ymin:.1}" x2="{cx:.1}" y2="{ymax:.1}" stroke="black"/>"#);
            let _ = writeln!(
                b,
                r##"<rect x="{:.1}" y="{yq3:.1}" width="{:.1}" height="{:.1}" fill="#aed6f1" stroke="black"/>"##,
                cx - half,
                2.0 * half,
                (yq1 - yq3).max(0.5)
            );
            let _ = writeln!(
                b,
                r#"<line x1="{:.1}" y1="{ymed:.1}" x2="{:.1}" y2="{ymed:.1}" stroke="black" stroke-width="2"/>"#,
                cx - half,
                cx + half
            );
            let ty = self.height - MARGIN_BOTTOM + 14.0;
            let _ = writeln!(
                b,
                r#"<text x="{cx:.1}" y="{ty:.1}" text-anchor="end" font-size="10" transform="rotate(-30 {cx:.1} {ty:.1})">{}</text>"#,
                escape(label)
            );
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Box plot over named samples; empty samples are skipped.
pub fn boxplot_svg(title: &str, y_label: &str, groups: &[(String, Vec<f64>)]) -> String {
    let stats: Vec<(String, BoxStats)> = groups
        .iter()
        .filter_map(|(name, vals)| crate::metrics::Summary::of(vals).map(|s| (name.clone(), s.box_stats())))
        .collect();
    let all: Vec<f64> = stats.iter().flat_map(|(_, s)| [s.min, s.max]).collect();
    let width = (120 + 90 * stats.len()).max(360) as u32;
    let mut c = Canvas::new(width, 420, title);
    c.axes((0.0, 1.0), padded_range(&all), "", y_label);
    c.boxes(&stats);
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_and_ranges() {
        assert_eq!(escape("a<b&\"c\""), "a&lt;b&amp;&quot;c&quot;");
        assert_eq!(padded_range(&[]), (0.0, 1.0));
        assert_eq!(padded_range(&[2.0]), (1.5, 2.5));
        let svg = boxplot_svg("t", "y", &[("a".into(), vec![1.0, 2.0, 3.0]), ("b".into(), vec![])]);
        assert!(svg.starts_with("<svg") && svg.contains("<rect x="));
        assert_eq!(svg.matches("<rect x=").count(), 1);
    }
}
