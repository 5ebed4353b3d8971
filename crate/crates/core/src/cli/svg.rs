//! Horizontal bar chart of attributions as standalone SVG.

use std::fmt::Write;

const ROW: f64 = 28.0;
const BAR: f64 = 18.0;
const LABEL_WIDTH: f64 = 140.0;
const PLOT_WIDTH: f64 = 420.0;
const VALUE_WIDTH: f64 = 90.0;
const TOP: f64 = 36.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One bar per feature, top to bottom in input order. Negative values
/// extend left of the zero line.
pub fn bar_chart(title: &str, labels: &[String], values: &[f64]) -> String {
    let n = values.len();
    let height = TOP + ROW * n as f64 + 20.0;
    let width = LABEL_WIDTH + PLOT_WIDTH + VALUE_WIDTH;
    let max_pos = values.iter().copied().fold(0.0f64, f64::max);
    let max_neg = values.iter().copied().fold(0.0f64, |a, v| a.max(-v));
    let span = if max_pos + max_neg > 0.0 { max_pos + max_neg } else { 1.0 };
    let scale = PLOT_WIDTH / span;
    let zero_x = LABEL_WIDTH + max_neg * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="20" font-size="14" font-weight="bold">{}</text>"#,
        LABEL_WIDTH,
        escape(title)
    );
    for (i, (label, &v)) in labels.iter().zip(values).enumerate() {
        let y = TOP + ROW * i as f64;
        let w = (v.abs() * scale).max(0.0);
        let x = if v >= 0.0 { zero_x } else { zero_x - w };
        let fill = if v >= 0.0 { "#3b6ea5" } else { "#c0504d" };
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LABEL_WIDTH - 8.0,
            y + BAR * 0.75,
            escape(label)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.1}" width="{w:.2}" height="{BAR}" fill="{fill}"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{:.4}</text>"#,
            LABEL_WIDTH + PLOT_WIDTH + 6.0,
            y + BAR * 0.75,
            v
        );
    }
    let _ = writeln!(
        out,
        r##"<line x1="{zero_x:.2}" y1="{:.1}" x2="{zero_x:.2}" y2="{:.1}" stroke="#333"/>"##,
        TOP - 4.0,
        TOP + ROW * n as f64
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_bar_per_feature() {
        let svg = bar_chart("risk <std>", &["a".into(), "b&c".into()], &[2.0, -1.0]);
        assert_eq!(svg.matches("<rect x=").count(), 2);
        assert!(svg.contains("b&amp;c") && svg.contains("risk &lt;std&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
