//! Minimal static SVG line charts for run diagnostics.

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Dashed overlay (for closed-form reference curves).
    pub dashed: bool,
}

pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_log: bool,
    pub series: Vec<Series>,
}

impl LineChart {
    pub fn render(&self) -> String {
        let (w, h) = (640.0, 420.0);
        let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 55.0);
        let transform = |v: f64| if self.log_log { v.log10() } else { v };

        let mut pts: Vec<Vec<(f64, f64)>> = Vec::new();
        for s in &self.series {
            pts.push(
                s.points
                    .iter()
                    .filter(|(x, y)| {
                        x.is_finite() && y.is_finite() && (!self.log_log || (*x > 0.0 && *y > 0.0))
                    })
                    .map(|&(x, y)| (transform(x), transform(y)))
                    .collect(),
            );
        }
        let flat: Vec<(f64, f64)> = pts.iter().flatten().cloned().collect();
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in &flat {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let pad_y = 0.06 * (y1 - y0);
        let (y0, y1) = (y0 - pad_y, y1 + pad_y);
        let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
        let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
        ));
        out.push_str(&format!(
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
            w / 2.0,
            xml_escape(&self.title)
        ));
        // Axes with 5 ticks per side.
        out.push_str(&format!(
            "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            h - mb,
            w - mr,
            h - mb
        ));
        out.push_str(&format!(
            "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
            h - mb
        ));
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let label_x = if self.log_log {
                format!("1e{fx:.1}")
            } else {
                format!("{fx:.3}")
            };
            let label_y = if self.log_log {
                format!("1e{fy:.1}")
            } else {
                format!("{fy:.3}")
            };
            out.push_str(&format!(
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#999\"/>\n<text x=\"{0}\" y=\"{3}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">{4}</text>\n",
                sx(fx),
                h - mb,
                h - mb + 5.0,
                h - mb + 18.0,
                label_x
            ));
            out.push_str(&format!(
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#999\"/>\n<text x=\"{3}\" y=\"{4}\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">{5}</text>\n",
                ml - 5.0,
                sy(fy),
                ml,
                ml - 8.0,
                sy(fy) + 4.0,
                label_y
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
            (ml + w - mr) / 2.0,
            h - 12.0,
            xml_escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            (mt + h - mb) / 2.0,
            (mt + h - mb) / 2.0,
            xml_escape(&self.y_label)
        ));

        for (idx, (s, p)) in self.series.iter().zip(&pts).enumerate() {
            if p.is_empty() {
                continue;
            }
            let color = COLORS[idx % COLORS.len()];
            let path: Vec<String> = p
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let dash = if s.dashed {
                " stroke-dasharray=\"6 4\""
            } else {
                ""
            };
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"{dash}/>\n",
                path.join(" ")
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\" font-family=\"sans-serif\">{}</text>\n",
                w - mr - 150.0,
                mt + 16.0 * idx as f64 + 8.0,
                xml_escape(&s.label)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
