//! Static SVG rendering of a DET staircase (FAR on x, FRR on y).

use ockd_core::eval::DetPoint;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn x_of(far: f64) -> f64 {
    MARGIN + far * (SIZE - 2.0 * MARGIN)
}

fn y_of(frr: f64) -> f64 {
    SIZE - MARGIN - frr * (SIZE - 2.0 * MARGIN)
}

pub fn det_svg(points: &[DetPoint], title: &str) -> String {
    let mut path = String::new();
    for (i, p) in points.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        path.push_str(&format!("{cmd}{:.2},{:.2} ", x_of(p.far), y_of(p.frr)));
    }

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    ));
    s.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n"
    ));
    s.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        SIZE / 2.0,
        xml_escape(title)
    ));

    // axes and ticks
    s.push_str(&format!(
        "  <rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        MARGIN,
        MARGIN,
        SIZE - 2.0 * MARGIN,
        SIZE - 2.0 * MARGIN
    ));
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{:.1}</text>\n",
            x_of(v),
            SIZE - MARGIN + 16.0,
            v
        ));
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{:.1}</text>\n",
            MARGIN - 6.0,
            y_of(v) + 3.0,
            v
        ));
        s.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#cccccc\"/>\n",
            x_of(v),
            MARGIN,
            x_of(v),
            SIZE - MARGIN
        ));
        s.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#cccccc\"/>\n",
            MARGIN,
            y_of(v),
            SIZE - MARGIN,
            y_of(v)
        ));
    }
    s.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">FAR</text>\n",
        SIZE / 2.0,
        SIZE - 12.0
    ));
    s.push_str(&format!(
        "  <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\">FRR</text>\n",
        SIZE / 2.0,
        SIZE / 2.0
    ));

    // chance diagonal and the staircase itself
    s.push_str(&format!(
        "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n",
        x_of(0.0),
        y_of(0.0),
        x_of(1.0),
        y_of(1.0)
    ));
    s.push_str(&format!(
        "  <path d=\"{}\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.8\"/>\n",
        path.trim_end()
    ));
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_xml_header_and_balanced_svg_tag() {
        let pts = vec![
            DetPoint { far: 1.0, frr: 0.0, threshold: -1.0 },
            DetPoint { far: 0.0, frr: 1.0, threshold: 1.0 },
        ];
        let svg = det_svg(&pts, "eval_seen <ockd>");
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("&lt;ockd&gt;"));
        assert_eq!(svg.matches("<svg ").count(), 1);
    }
}
