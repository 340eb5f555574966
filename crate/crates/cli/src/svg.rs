//! Static SVG picture of a realization: lines, points and Voronoi edges
//! inside the observation window.

use std::fmt::Write;

use plcp_core::geometry::{chord_half_length, line_point, Point2};
use plcp_core::tessellation::EdgeKind;
use plcp_core::{Realization, Tessellation};

/// Clips segment `a → b` to the square `[-h, h]²` (Liang–Barsky).
fn clip(a: Point2, b: Point2, h: f64) -> Option<(Point2, Point2)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-d.x, a.x + h), (d.x, h - a.x), (-d.y, a.y + h), (d.y, h - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 <= t1).then(|| (a + d * t0, a + d * t1))
}

fn segment(out: &mut String, a: Point2, b: Point2, class: &str) {
    // y is flipped so the picture has the usual orientation.
    let _ = writeln!(
        out,
        r#"<line class="{class}" x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}"/>"#,
        a.x, -a.y, b.x, -b.y
    );
}

/// Renders `real` and, if given, its tessellation. `metadata` goes into a
/// leading comment as `key=value` lines.
pub fn render(real: &Realization, tess: Option<&Tessellation>, metadata: &[(String, String)]) -> String {
    let h = real.obs_radius;
    let far = 4.0 * real.sim_radius;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!--\n");
    for (k, v) in metadata {
        let _ = writeln!(out, "{k}={v}");
    }
    out.push_str("-->\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.4} {:.4} {:.4} {:.4}" width="800" height="800">"#,
        -h,
        -h,
        2.0 * h,
        2.0 * h
    );
    let stroke = h / 400.0;
    let _ = writeln!(
        out,
        "<style>line.road{{stroke:#555;stroke-width:{:.5}}} line.cell{{stroke:#1f77b4;stroke-width:{:.5}}} circle{{fill:#d62728}}</style>",
        2.0 * stroke,
        stroke
    );
    let _ = writeln!(
        out,
        r#"<rect x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}" fill="white"/>"#,
        -h,
        -h,
        2.0 * h,
        2.0 * h
    );

    for line in &real.lines {
        if let Ok(half) = chord_half_length(line.r(), real.sim_radius) {
            if let Some((a, b)) = clip(line_point(line, -half), line_point(line, half), h) {
                segment(&mut out, a, b, "road");
            }
        }
    }
    if let Some(t) = tess {
        for e in &t.edges {
            let ends = match e.kind {
                EdgeKind::Segment { from, to } => (t.vertices[from], t.vertices[to]),
                EdgeKind::Ray { from, direction } => (t.vertices[from], t.vertices[from] + direction * far),
                EdgeKind::Line { through, direction } => (through - direction * far, through + direction * far),
            };
            if let Some((a, b)) = clip(ends.0, ends.1, h) {
                segment(&mut out, a, b, "cell");
            }
        }
    }
    let radius = h / 200.0;
    for p in &real.points {
        let q = p.position;
        if q.x.abs() <= h && q.y.abs() <= h {
            let _ = writeln!(out, r#"<circle cx="{:.4}" cy="{:.4}" r="{:.4}"/>"#, q.x, -q.y, radius);
        }
    }
    out.push_str("</svg>\n");
    out
}

/// `key=value` lines of the leading comment of an SVG made by [`render`].
pub fn metadata_of(svg: &str) -> Option<Vec<(String, String)>> {
    let start = svg.find("<!--")? + 4;
    let end = start + svg[start..].find("-->")?;
    Some(
        svg[start..end]
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
    )
}
