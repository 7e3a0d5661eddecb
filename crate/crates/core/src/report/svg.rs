//! Standalone SVG plots: the scree curve and the variable similarity map.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::varcluster::{ClusterAssignment, SimilarityProfile};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Maps data coordinates into the plotting area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn axes(out: &mut String, f: &Frame, xticks: &[(f64, String)], yticks: &[(f64, String)], xlabel: &str, ylabel: &str) {
    let (left, right, bottom, top) = (f.x(f.x0), f.x(f.x1), f.y(f.y0), f.y(f.y1));
    let _ = writeln!(
        out,
        r#"<path d="M{left:.2},{top:.2} L{left:.2},{bottom:.2} L{right:.2},{bottom:.2}" fill="none" stroke="black"/>"#
    );
    for (x, label) in xticks {
        let px = f.x(*x);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{bottom:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 5.0,
            bottom + 18.0,
            escape(label)
        );
    }
    for (y, label) in yticks {
        let py = f.y(*y);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{left:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            py + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(ylabel)
    );
}

/// Scree plot of `(component number, eigenvalue)` points.
pub fn render_svg_scree(series: &[(usize, f64)]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Report("scree plot needs at least one eigenvalue".into()));
    }
    let n = series.len();
    let top = series.iter().map(|p| p.1).fold(0.0, f64::max).max(1.0).ceil();
    let f = Frame {
        x0: 0.5,
        x1: n as f64 + 0.5,
        y0: 0.0,
        y1: top,
    };
    let mut out = String::new();
    open(&mut out, "Scree plot");
    let xticks: Vec<(f64, String)> = series.iter().map(|&(i, _)| (i as f64, i.to_string())).collect();
    let steps = 4;
    let yticks: Vec<(f64, String)> = (0..=steps)
        .map(|s| {
            let y = top * s as f64 / steps as f64;
            (y, format!("{y:.2}"))
        })
        .collect();
    axes(&mut out, &f, &xticks, &yticks, "Component", "Eigenvalue");
    let path: Vec<String> = series
        .iter()
        .map(|&(i, l)| format!("{:.2},{:.2}", f.x(i as f64), f.y(l)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        path.join(" ")
    );
    for &(i, l) in series {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"><title>pc{i}: {l:.3}</title></circle>"#,
            f.x(i as f64),
            f.y(l)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Marker glyph for cluster slot `slot`; the last slot is reserved for
/// unassigned variables.
fn marker(slot: usize, cx: f64, cy: f64, colour: &str) -> String {
    let r = 5.0;
    match slot % 4 {
        0 => format!(r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r}" fill="{colour}"/>"#),
        1 => format!(
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{colour}"/>"#,
            cx - r,
            cy - r,
            2.0 * r,
            2.0 * r
        ),
        2 => format!(
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{colour}"/>"#,
            cx,
            cy - r * 1.2,
            cx - r * 1.1,
            cy + r,
            cx + r * 1.1,
            cy + r
        ),
        _ => format!(
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{colour}"/>"#,
            cx,
            cy - r * 1.3,
            cx + r * 1.3,
            cy,
            cx,
            cy + r * 1.3,
            cx - r * 1.3,
            cy
        ),
    }
}

/// Variables placed by their similarity to pc1 (x) and pc2 (y); the marker
/// shape and colour identify the cluster. Requires exactly two components.
pub fn render_svg_similarity(profiles: &[SimilarityProfile], assignment: &ClusterAssignment) -> Result<String> {
    if profiles.is_empty() {
        return Err(Error::Report("similarity plot needs at least one variable".into()));
    }
    let k = profiles[0].similarity.len();
    if k != 2 || profiles.iter().any(|p| p.similarity.len() != 2) {
        return Err(Error::Report(format!(
            "similarity plot is only drawn for exactly 2 kept components (got {k})"
        )));
    }
    if assignment.assignments.len() != profiles.len() {
        return Err(Error::Dimension {
            context: "report",
            expected: profiles.len(),
            got: assignment.assignments.len(),
        });
    }
    let f = Frame {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };
    let ticks: Vec<(f64, String)> = (0..=4).map(|s| (s as f64 / 4.0, format!("{:.2}", s as f64 / 4.0))).collect();
    let mut out = String::new();
    open(&mut out, "Similarity of variables to pc1 and pc2");
    axes(&mut out, &f, &ticks, &ticks, "Similarity to pc1", "Similarity to pc2");

    let unassigned_slot = assignment.cluster_names.len();
    let slot_of = |a: Option<usize>| a.unwrap_or(unassigned_slot);
    let colour_of = |slot: usize| {
        if slot == unassigned_slot {
            "#7f7f7f"
        } else {
            COLOURS[slot % COLOURS.len()]
        }
    };
    for (p, &a) in profiles.iter().zip(&assignment.assignments) {
        let (cx, cy) = (f.x(p.similarity[0]), f.y(p.similarity[1]));
        let slot = slot_of(a);
        let _ = writeln!(out, "<g><title>{}</title>", escape(&p.variable));
        let _ = writeln!(out, "{}", marker(slot, cx, cy, colour_of(slot)));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text></g>"#,
            cx + 8.0,
            cy - 6.0,
            escape(&p.variable)
        );
    }

    // legend
    let mut names: Vec<String> = assignment.cluster_names.clone();
    if assignment.assignments.iter().any(Option::is_none) {
        names.push(crate::varcluster::UNASSIGNED.to_string());
    }
    for (slot, name) in names.iter().enumerate() {
        let y = MARGIN + 14.0 * slot as f64;
        let x = WIDTH - MARGIN - 90.0;
        let _ = writeln!(out, "{}", marker(slot, x, y, colour_of(slot)));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 10.0, y + 4.0, escape(name));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
