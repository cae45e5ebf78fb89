//! Segmentation strips as standalone SVG.

use std::fmt::Write as _;

pub const PALETTE: [&str; 20] = [
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728", "#ff9896",
    "#9467bd", "#c5b0d5", "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f", "#c7c7c7",
    "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
];
pub const BACKGROUND_COLOR: &str = "#ffffff";
pub const WIDTH: usize = 1000;
const STRIP_HEIGHT: usize = 20;
const GAP: usize = 4;
const TITLE_HEIGHT: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Strip {
    pub name: String,
    pub labels: Vec<Option<usize>>,
}

/// Strips of one video, drawn under a title line.
#[derive(Clone, Debug, PartialEq)]
pub struct StripGroup {
    pub title: String,
    pub strips: Vec<Strip>,
}

pub fn color(label: Option<usize>) -> &'static str {
    label.map_or(BACKGROUND_COLOR, |l| PALETTE[l % PALETTE.len()])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Runs drawn as rectangles whose integer edges are `round(i·WIDTH/len)`,
/// so each strip spans exactly the canvas width.
pub fn emit_strips(groups: &[StripGroup]) -> String {
    let height: usize = groups
        .iter()
        .map(|g| TITLE_HEIGHT + g.strips.len() * (STRIP_HEIGHT + GAP))
        .sum::<usize>()
        .max(1);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let mut y = 0;
    for g in groups {
        let _ = writeln!(
            out,
            r#"<text x="0" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            y + TITLE_HEIGHT - 4,
            escape(&g.title)
        );
        y += TITLE_HEIGHT;
        for s in &g.strips {
            let _ = writeln!(out, r#"<g class="strip"><title>{}</title>"#, escape(&s.name));
            let n = s.labels.len().max(1);
            let edge = |i: usize| ((i * WIDTH) as f64 / n as f64).round() as usize;
            let mut start = 0;
            while start < s.labels.len() {
                let mut end = start + 1;
                while end < s.labels.len() && s.labels[end] == s.labels[start] {
                    end += 1;
                }
                let (x0, x1) = (edge(start), edge(end));
                let _ = writeln!(
                    out,
                    r#"<rect x="{x0}" y="{y}" width="{}" height="{STRIP_HEIGHT}" fill="{}"/>"#,
                    x1 - x0,
                    color(s.labels[start])
                );
                start = end;
            }
            out.push_str("</g>\n");
            y += STRIP_HEIGHT + GAP;
        }
    }
    out.push_str("</svg>\n");
    out
}
