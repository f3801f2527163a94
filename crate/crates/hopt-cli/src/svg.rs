//! Minimal hand-emitted SVG plots: axes, ticks, polylines, scatter
//! markers, and a legend. Output is a pure function of the input numbers,
//! so regenerated files are byte-identical.

/// One plotted series; line and markers can be toggled independently.
pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: &'a [(f64, f64)],
    pub line: bool,
    pub markers: bool,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 86.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;
const TICKS: usize = 5;

struct Axis {
    min: f64,
    max: f64,
}

impl Axis {
    fn over(values: impl Iterator<Item = f64>) -> Axis {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            return Axis { min: 0.0, max: 1.0 };
        }
        // Pad so points never sit on the frame; keep degenerate ranges
        // plottable.
        let span = (max - min).max(min.abs().max(max.abs()) * 1e-9).max(1e-12);
        Axis { min: min - 0.05 * span, max: max + 0.05 * span }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.3e}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a complete SVG document.
pub fn plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let xs = Axis::over(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let ys = Axis::over(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let px = |x: f64| MARGIN_LEFT + xs.frac(x) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT);
    let py = |y: f64| HEIGHT - MARGIN_BOTTOM - ys.frac(y) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        fmt_coord(WIDTH / 2.0),
        escape(title)
    ));

    // Frame.
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP),
        fmt_coord(WIDTH - MARGIN_LEFT - MARGIN_RIGHT),
        fmt_coord(HEIGHT - MARGIN_TOP - MARGIN_BOTTOM),
    ));

    // Ticks and grid.
    for i in 0..TICKS {
        let t = i as f64 / (TICKS - 1) as f64;
        let xv = xs.min + t * (xs.max - xs.min);
        let yv = ys.min + t * (ys.max - ys.min);
        let xp = px(xv);
        let yp = py(yv);
        out.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt_coord(HEIGHT - MARGIN_BOTTOM),
            fmt_coord(HEIGHT - MARGIN_BOTTOM + 5.0),
            x = fmt_coord(xp),
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            fmt_coord(xp),
            fmt_coord(HEIGHT - MARGIN_BOTTOM + 20.0),
            fmt_tick(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"black\"/>\n",
            fmt_coord(MARGIN_LEFT - 5.0),
            fmt_coord(MARGIN_LEFT),
            y = fmt_coord(yp),
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            fmt_coord(MARGIN_LEFT - 9.0),
            fmt_coord(yp + 4.0),
            fmt_tick(yv)
        ));
    }

    // Axis labels.
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        fmt_coord((MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0),
        fmt_coord(HEIGHT - 14.0),
        escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        fmt_coord((MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0),
        fmt_coord((MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0),
        escape(y_label)
    ));

    // Series.
    for s in series {
        if s.line && s.points.len() > 1 {
            let coords: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{},{}", fmt_coord(px(x)), fmt_coord(py(y))))
                .collect();
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                s.color,
                coords.join(" ")
            ));
        }
        if s.markers {
            for &(x, y) in s.points {
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
                    fmt_coord(px(x)),
                    fmt_coord(py(y)),
                    s.color
                ));
            }
        }
    }

    // Legend, top-right inside the frame.
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 + 16.0 * i as f64;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
            fmt_coord(WIDTH - MARGIN_RIGHT - 150.0),
            fmt_coord(y - 9.0),
            s.color
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            fmt_coord(WIDTH - MARGIN_RIGHT - 135.0),
            fmt_coord(y),
            escape(s.label)
        ));
    }
    out.push_str("</svg>\n");
    out
}
