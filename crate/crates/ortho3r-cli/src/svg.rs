//! Self-contained SVG output (inline styles, no external assets).
//!
//! Data coordinates map onto a fixed 1000x1000 plot area with margins;
//! coordinates are printed with three decimals, i.e. 1e-3 of the plot
//! extent.

use std::fmt::Write as _;

pub const PLOT: f64 = 1000.0;
pub const MARGIN: f64 = 70.0;

pub struct Frame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Frame {
    pub fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x_min) / (self.x_max - self.x_min) * PLOT
    }

    /// SVG y grows downward.
    pub fn y(&self, v: f64) -> f64 {
        MARGIN + (self.y_max - v) / (self.y_max - self.y_min) * PLOT
    }
}

pub struct SvgDoc {
    frame: Frame,
    body: String,
}

impl SvgDoc {
    pub fn new(frame: Frame) -> Self {
        Self { frame, body: String::new() }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, dash: Option<&str>) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.3},{:.3}",
                if i == 0 { "M" } else { " L" },
                self.frame.x(*x),
                self.frame.y(*y)
            );
        }
        let dash = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
        let _ = writeln!(
            self.body,
            "  <path d=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash}/>"
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "  <circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{r}\" fill=\"{fill}\"/>",
            self.frame.x(x),
            self.frame.y(y)
        );
    }

    pub fn cross(&mut self, x: f64, y: f64, r: f64, stroke: &str) {
        let (cx, cy) = (self.frame.x(x), self.frame.y(y));
        let _ = writeln!(
            self.body,
            "  <path d=\"M{:.3},{:.3} L{:.3},{:.3} M{:.3},{:.3} L{:.3},{:.3}\" \
             stroke=\"{stroke}\" stroke-width=\"2\"/>",
            cx - r,
            cy - r,
            cx + r,
            cy + r,
            cx - r,
            cy + r,
            cx + r,
            cy - r
        );
    }

    pub fn rect_data(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, fill: &str) {
        let (px, py) = (self.frame.x(x0), self.frame.y(y1));
        let (qx, qy) = (self.frame.x(x1), self.frame.y(y0));
        let _ = writeln!(
            self.body,
            "  <rect x=\"{px:.3}\" y=\"{py:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{fill}\"/>",
            qx - px,
            qy - py
        );
    }

    /// Rectangle in absolute pixel coordinates (legend swatches).
    pub fn rect_abs(&mut self, px: f64, py: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "  <rect x=\"{px:.1}\" y=\"{py:.1}\" width=\"{w:.1}\" height=\"{h:.1}\" \
             fill=\"{fill}\" stroke=\"#222\" stroke-width=\"0.5\"/>"
        );
    }

    pub fn text(&mut self, px: f64, py: f64, size: f64, content: &str, anchor: &str) {
        let _ = writeln!(
            self.body,
            "  <text x=\"{px:.1}\" y=\"{py:.1}\" font-size=\"{size}\" \
             font-family=\"sans-serif\" text-anchor=\"{anchor}\">{}</text>",
            content.replace('&', "&amp;").replace('<', "&lt;")
        );
    }

    /// Axis box with tick labels at the frame corners and midpoints.
    pub fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x_min, x_max, y_min, y_max) =
            (self.frame.x_min, self.frame.x_max, self.frame.y_min, self.frame.y_max);
        let (x0, y0, y1) = (MARGIN, MARGIN, MARGIN + PLOT);
        let _ = writeln!(
            self.body,
            "  <rect x=\"{x0}\" y=\"{y0}\" width=\"{PLOT}\" height=\"{PLOT}\" \
             fill=\"none\" stroke=\"#222\" stroke-width=\"1.5\"/>"
        );
        for (frac, v) in [(0.0, x_min), (0.5, 0.5 * (x_min + x_max)), (1.0, x_max)] {
            self.text(x0 + frac * PLOT, y1 + 28.0, 20.0, &format!("{v:.3}"), "middle");
        }
        for (frac, v) in [(0.0, y_min), (0.5, 0.5 * (y_min + y_max)), (1.0, y_max)] {
            self.text(x0 - 10.0, y1 - frac * PLOT + 6.0, 20.0, &format!("{v:.3}"), "end");
        }
        self.text(x0 + 0.5 * PLOT, y1 + 54.0, 24.0, x_label, "middle");
        self.text(18.0, y0 - 20.0, 24.0, y_label, "start");
    }

    pub fn render(&self) -> String {
        let side = PLOT + 2.0 * MARGIN;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {side} {side}\" \
             width=\"{side}\" height=\"{side}\">\n\
             <rect width=\"{side}\" height=\"{side}\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

/// Split a polyline wherever consecutive points jump more than half the
/// frame (torus seam crossings).
pub fn split_at_seams(pts: &[(f64, f64)], max_dx: f64, max_dy: f64) -> Vec<Vec<(f64, f64)>> {
    let mut chunks = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        if let Some(&prev) = current.last() {
            if (p.0 - prev.0).abs() > max_dx || (p.1 - prev.1).abs() > max_dy {
                chunks.push(std::mem::take(&mut current));
            }
        }
        current.push(p);
    }
    if !current.is_empty() {
        chunks.push(current);
    }
    chunks
}
