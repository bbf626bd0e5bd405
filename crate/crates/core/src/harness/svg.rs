//! Minimal SVG line and scatter plots, written as text.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Linear axes mapping data coordinates into the plot area.
pub struct Canvas {
    x: (f64, f64),
    y: (f64, f64),
    y_down: bool,
    body: String,
}

impl Canvas {
    /// `y_down` puts the smallest y at the top (used for ranks).
    pub fn new(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64), y_down: bool) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let mut c = Self {
            x: widen(x),
            y: widen(y),
            y_down,
            body: String::new(),
        };
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = write!(
            c.body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
             <rect class=\"frame\" x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
             <text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
            (x0 + x1) / 2.0,
            escape(title),
            x1 - x0,
            y1 - y0,
            (x0 + x1) / 2.0,
            H - 15.0,
            escape(x_label),
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label),
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = c.x.0 + t * (c.x.1 - c.x.0);
            let yv = c.y.0 + t * (c.y.1 - c.y.0);
            let (px, py) = (c.px(xv), c.py(yv));
            let _ = writeln!(
                c.body,
                "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
                y1 + 18.0,
                tick(xv),
                x0 - 6.0,
                py + 4.0,
                tick(yv)
            );
        }
        c
    }

    pub fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - RIGHT - LEFT)
    }

    pub fn py(&self, y: f64) -> f64 {
        let t = (y - self.y.0) / (self.y.1 - self.y.0);
        let t = if self.y_down { t } else { 1.0 - t };
        TOP + t * (H - BOTTOM - TOP)
    }

    pub fn line(&mut self, class: &str, attrs: &str, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            "<line class=\"{class}\" {attrs} x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
            self.px(a.0),
            self.py(a.1),
            self.px(b.0),
            self.py(b.1)
        );
    }

    /// A named series drawn as a polyline with markers, plus a legend entry.
    pub fn series(&mut self, index: usize, name: &str, points: &[(f64, f64)]) {
        let col = color(index);
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let _ = writeln!(
            self.body,
            "<polyline class=\"series\" data-name=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{col}\" stroke-width=\"2\"/>",
            escape(name),
            coords.join(" ")
        );
        for &(x, y) in points {
            self.point("marker", "", x, y, col);
        }
        let ly = TOP + 10.0 + 18.0 * index as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(
            self.body,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{col}\" stroke-width=\"2\"/>\n<text x=\"{}\" y=\"{}\">{}</text>",
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(name)
        );
    }

    pub fn point(&mut self, class: &str, attrs: &str, x: f64, y: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<circle class=\"{class}\" {attrs} cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{fill}\"/>",
            self.px(x),
            self.py(y)
        );
    }

    pub fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}
