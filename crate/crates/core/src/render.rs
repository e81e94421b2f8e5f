//! SVG renderers: triangulation, Voronoi tessellation, level curves of a
//! per-vertex scalar (linear interpolation over Delaunay triangles), and the
//! overlay of the deformed harmonic graph against the Delaunay triangulation
//! of the deformed points.
//!
//! Output is deterministic: no timestamps, fixed float formatting, elements
//! emitted in graph order. Figure fidelity is qualitative (roles, layout,
//! highlighted zero level), never pixel-exact.

use std::fmt::Write as _;

use crate::geometry::DelaunayGraph;
use crate::scalar::Scalar;

/// Styling and marker options.
#[derive(Debug, Clone)]
pub struct RenderOptions {
    /// Draw a star marker at this vertex (the origin in Palm samples).
    pub star_vertex: Option<usize>,
    pub edge_color: String,
    pub point_color: String,
    pub stroke_scale: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            star_vertex: None,
            edge_color: "#444444".into(),
            point_color: "#1a1a1a".into(),
            stroke_scale: 1.0,
        }
    }
}

struct Canvas {
    body: String,
    len: f64,
}

impl Canvas {
    fn new(len: f64) -> Self {
        Canvas {
            body: String::new(),
            len,
        }
    }

    /// Flip into SVG's downward-y convention.
    fn y(&self, y: f64) -> f64 {
        self.len - y
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" {} />"#,
            x1,
            self.y(y1),
            x2,
            self.y(y2),
            style
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.6}" cy="{:.6}" r="{:.6}" {} />"#,
            x,
            self.y(y),
            r,
            style
        );
    }

    fn polygon(&mut self, pts: &[[f64; 2]], style: &str) {
        let mut coords = String::new();
        for p in pts {
            let _ = write!(coords, "{:.6},{:.6} ", p[0], self.y(p[1]));
        }
        let _ = writeln!(self.body, r#"<polygon points="{}" {} />"#, coords.trim_end(), style);
    }

    fn comment(&mut self, text: &str) {
        let _ = writeln!(self.body, "<!-- {text} -->");
    }

    fn star(&mut self, x: f64, y: f64, r: f64, style: &str) {
        let mut pts = Vec::new();
        for k in 0..10 {
            let angle = std::f64::consts::PI / 2.0 + k as f64 * std::f64::consts::PI / 5.0;
            let radius = if k % 2 == 0 { r } else { 0.4 * r };
            pts.push([x + radius * angle.cos(), y + radius * angle.sin()]);
        }
        self.polygon(&pts, style);
    }

    fn finish(self, margin: f64) -> String {
        format!(
            concat!(
                r#"<?xml version="1.0" encoding="UTF-8"?>"#,
                "\n",
                r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
                "\n{}</svg>\n"
            ),
            -margin,
            -margin,
            self.len + 2.0 * margin,
            self.len + 2.0 * margin,
            self.body
        )
    }
}

fn edge_segments<S: Scalar>(graph: &DelaunayGraph<S>) -> Vec<([f64; 2], [f64; 2], bool)> {
    let mut out = Vec::with_capacity(graph.edges.len());
    for e in &graph.edges {
        let a = graph.pos(e.a);
        let p = [a[0].as_f64(), a[1].as_f64()];
        let q = [
            p[0] + e.delta[0].as_f64(),
            p[1] + e.delta[1].as_f64(),
        ];
        let wrapped = e.wrap != [0, 0];
        out.push((p, q, wrapped));
    }
    out
}

/// Points and Delaunay edges; wrap edges stick out of the box and reappear
/// from the twin side.
pub fn render_triangulation<S: Scalar>(graph: &DelaunayGraph<S>, opts: &RenderOptions) -> String {
    let len = graph.len().as_f64();
    let mut c = Canvas::new(len);
    let sw = len / 400.0 * opts.stroke_scale;
    let edge_style = format!(r#"stroke="{}" stroke-width="{:.6}""#, opts.edge_color, sw);
    for (p, q, _) in edge_segments(graph) {
        c.line(p[0], p[1], q[0], q[1], &edge_style);
    }
    // wrap edges stick out of the box; draw the twin segment entering from
    // the opposite side as well
    for e in &graph.edges {
        if e.wrap != [0, 0] {
            let b = graph.pos(e.b);
            let q = [b[0].as_f64(), b[1].as_f64()];
            let p = [q[0] - e.delta[0].as_f64(), q[1] - e.delta[1].as_f64()];
            c.line(p[0], p[1], q[0], q[1], &edge_style);
        }
    }
    let point_style = format!(r#"fill="{}""#, opts.point_color);
    for v in 0..graph.n() {
        let p = graph.pos(v);
        c.circle(p[0].as_f64(), p[1].as_f64(), len / 200.0, &point_style);
    }
    if let Some(v) = opts.star_vertex {
        let p = graph.pos(v);
        c.star(
            p[0].as_f64(),
            p[1].as_f64(),
            len / 30.0,
            r##"fill="#d4a017" stroke="#7a5c00" stroke-width="0.02""##,
        );
    }
    c.finish(len / 20.0)
}

/// Same layout as [`render_triangulation`] but over explicit positions (the
/// deformed image of the graph).
pub fn render_positions<S: Scalar>(
    graph: &DelaunayGraph<S>,
    positions: &[[S; 2]],
    opts: &RenderOptions,
) -> String {
    let len = graph.len().as_f64();
    let mut c = Canvas::new(len);
    let sw = len / 400.0 * opts.stroke_scale;
    let edge_style = format!(r#"stroke="{}" stroke-width="{:.6}""#, opts.edge_color, sw);
    for e in &graph.edges {
        let pa = graph.pos(e.a);
        let pb = graph.pos(e.b);
        // image displacement across the edge
        let mut d = [0.0f64; 2];
        for k in 0..2 {
            let chi_b = positions[e.b][k] - pb[k];
            let chi_a = positions[e.a][k] - pa[k];
            d[k] = (e.delta[k] + chi_b - chi_a).as_f64();
        }
        let p = [positions[e.a][0].as_f64(), positions[e.a][1].as_f64()];
        c.line(p[0], p[1], p[0] + d[0], p[1] + d[1], &edge_style);
        if e.wrap != [0, 0] {
            let q = [positions[e.b][0].as_f64(), positions[e.b][1].as_f64()];
            c.line(q[0] - d[0], q[1] - d[1], q[0], q[1], &edge_style);
        }
    }
    let point_style = format!(r#"fill="{}""#, opts.point_color);
    for p in positions {
        c.circle(p[0].as_f64(), p[1].as_f64(), len / 200.0, &point_style);
    }
    if let Some(v) = opts.star_vertex {
        c.star(
            positions[v][0].as_f64(),
            positions[v][1].as_f64(),
            len / 30.0,
            r##"fill="#d4a017" stroke="#7a5c00" stroke-width="0.02""##,
        );
    }
    c.finish(len / 20.0)
}

/// Voronoi cells of a periodic graph.
pub fn render_voronoi<S: Scalar>(graph: &DelaunayGraph<S>, opts: &RenderOptions) -> String {
    let len = graph.len().as_f64();
    let mut c = Canvas::new(len);
    let sw = len / 400.0 * opts.stroke_scale;
    let style = format!(
        r#"fill="none" stroke="{}" stroke-width="{:.6}""#,
        opts.edge_color, sw
    );
    for (v, cell) in graph.cells.iter().enumerate() {
        let site = graph.pos(v);
        let poly: Vec<[f64; 2]> = cell
            .poly
            .iter()
            .map(|q| {
                [
                    (site[0] + q[0]).as_f64(),
                    (site[1] + q[1]).as_f64(),
                ]
            })
            .collect();
        if !poly.is_empty() {
            c.polygon(&poly, &style);
        }
    }
    let point_style = format!(r#"fill="{}""#, opts.point_color);
    for v in 0..graph.n() {
        let p = graph.pos(v);
        c.circle(p[0].as_f64(), p[1].as_f64(), len / 250.0, &point_style);
    }
    c.finish(len / 20.0)
}

/// Level curves of a per-vertex scalar, linearly interpolated over the
/// Delaunay triangles. `levels` values are drawn in blue-to-red order; the
/// zero level, when within range, is drawn last in green and thicker.
pub fn render_level_curves<S: Scalar>(
    graph: &DelaunayGraph<S>,
    values: &[S],
    n_levels: usize,
    opts: &RenderOptions,
) -> String {
    let len = graph.len().as_f64();
    let mut c = Canvas::new(len);
    let sw = len / 400.0 * opts.stroke_scale;

    let vals: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mut levels: Vec<(f64, String, f64)> = Vec::new();
    if hi > lo {
        for k in 1..=n_levels {
            let t = k as f64 / (n_levels + 1) as f64;
            let level = lo + t * (hi - lo);
            // blue (low) to red (high)
            let r = (255.0 * t) as u8;
            let b = (255.0 * (1.0 - t)) as u8;
            levels.push((level, format!("#{r:02x}30{b:02x}"), sw));
        }
    }
    if lo < 0.0 && 0.0 < hi {
        levels.push((0.0, "#0a8f0a".to_string(), 2.0 * sw));
    }

    // triangle corner coordinates, unwrapped per stored triangle
    let lenf = graph.len();
    for (level, color, width) in &levels {
        let style = format!(r#"stroke="{color}" stroke-width="{width:.6}" fill="none""#);
        for tri in &graph.triangles {
            let mut corner = [[0.0f64; 2]; 3];
            let mut f = [0.0f64; 3];
            for i in 0..3 {
                let v = tri.v[i];
                let p = graph.pos(v);
                corner[i] = [
                    (p[0] + S::of_f64(tri.wrap[i][0] as f64) * lenf).as_f64(),
                    (p[1] + S::of_f64(tri.wrap[i][1] as f64) * lenf).as_f64(),
                ];
                f[i] = vals[v];
            }
            let mut pts = Vec::new();
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                let (fi, fj) = (f[i] - level, f[j] - level);
                if (fi < 0.0 && fj > 0.0) || (fi > 0.0 && fj < 0.0) {
                    let t = fi / (fi - fj);
                    pts.push([
                        corner[i][0] + t * (corner[j][0] - corner[i][0]),
                        corner[i][1] + t * (corner[j][1] - corner[i][1]),
                    ]);
                }
            }
            if pts.len() == 2 {
                c.line(pts[0][0], pts[0][1], pts[1][0], pts[1][1], &style);
            }
        }
    }
    c.finish(len / 20.0)
}

/// Overlay of the harmonic graph (edges inherited from the original
/// triangulation, drawn at the deformed positions) and the Delaunay
/// triangulation of the deformed points. Returns the SVG and the number of
/// harmonic-graph edges absent from the new triangulation.
pub fn render_overlay<S: Scalar>(
    graph: &DelaunayGraph<S>,
    positions: &[[S; 2]],
    new_graph: &DelaunayGraph<S>,
) -> (String, usize) {
    let len = graph.len().as_f64();
    let mut c = Canvas::new(len);
    let sw = len / 400.0;

    let pair = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let new_edges: std::collections::HashSet<(usize, usize)> = new_graph
        .edges
        .iter()
        .map(|e| pair(e.a, e.b))
        .collect();
    let mut non_shared = 0usize;
    let harmonic_pairs: std::collections::HashSet<(usize, usize)> =
        graph.edges.iter().map(|e| pair(e.a, e.b)).collect();
    for e in &graph.edges {
        if !new_edges.contains(&pair(e.a, e.b)) {
            non_shared += 1;
        }
    }
    c.comment(&format!(
        "harmonic-graph edges absent from the Delaunay triangulation of the deformed points: {non_shared}"
    ));

    // harmonic graph in yellow
    let harmonic_style = format!(r##"stroke="#e6c200" stroke-width="{:.6}""##, 1.6 * sw);
    for e in &graph.edges {
        let pa = graph.pos(e.a);
        let pb = graph.pos(e.b);
        let mut d = [0.0f64; 2];
        for k in 0..2 {
            d[k] = (e.delta[k] + (positions[e.b][k] - pb[k]) - (positions[e.a][k] - pa[k]))
                .as_f64();
        }
        let p = [positions[e.a][0].as_f64(), positions[e.a][1].as_f64()];
        c.line(p[0], p[1], p[0] + d[0], p[1] + d[1], &harmonic_style);
    }
    // new Delaunay edges, black and dashed, thicker where they are new
    for e in &new_graph.edges {
        let style = if harmonic_pairs.contains(&pair(e.a, e.b)) {
            format!(
                r##"stroke="#000000" stroke-width="{:.6}" stroke-dasharray="{:.6} {:.6}""##,
                0.7 * sw,
                4.0 * sw,
                3.0 * sw
            )
        } else {
            format!(
                r##"stroke="#000000" stroke-width="{:.6}" stroke-dasharray="{:.6} {:.6}""##,
                1.8 * sw,
                4.0 * sw,
                3.0 * sw
            )
        };
        let p = new_graph.pos(e.a);
        let q = [
            p[0].as_f64() + e.delta[0].as_f64(),
            p[1].as_f64() + e.delta[1].as_f64(),
        ];
        c.line(p[0].as_f64(), p[1].as_f64(), q[0], q[1], &style);
    }
    (c.finish(len / 20.0), non_shared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_delaunay;
    use crate::pointprocess::{BoxMode, PointSet};
    use crate::testutil::{grid_fixture, poisson_graph};

    fn count_occurrences(text: &str, needle: &str) -> usize {
        text.matches(needle).count()
    }

    #[test]
    fn triangle_fixture_counts() {
        let set = PointSet::from_points(
            2,
            10.0,
            BoxMode::Planar,
            false,
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        )
        .unwrap();
        let g = build_delaunay(set).unwrap();
        let svg = render_triangulation(&g, &RenderOptions::default());
        assert_eq!(count_occurrences(&svg, "<line "), 3);
        assert_eq!(count_occurrences(&svg, "<circle "), 3);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn constant_scalar_yields_no_level_lines() {
        let g = poisson_graph(8.0, 81);
        let values = vec![2.5f64; g.n()];
        let svg = render_level_curves(&g, &values, 8, &RenderOptions::default());
        assert_eq!(count_occurrences(&svg, "<line "), 0);
        assert!(svg.contains("<svg "));
    }

    #[test]
    fn grid_overlay_has_no_missing_edges() {
        let g = grid_fixture(6, 6.0);
        let positions: Vec<[f64; 2]> = (0..g.n()).map(|v| g.pos(v)).collect();
        let (svg, non_shared) = render_overlay(&g, &positions, &g);
        assert_eq!(non_shared, 0);
        assert!(svg.contains("absent from the Delaunay"));
    }

    #[test]
    fn voronoi_renders_every_cell() {
        let g = poisson_graph(8.0, 82);
        let svg = render_voronoi(&g, &RenderOptions::default());
        assert_eq!(count_occurrences(&svg, "<polygon "), g.n());
    }

    #[test]
    fn star_marker_is_present_when_requested() {
        let g = poisson_graph(8.0, 83);
        let opts = RenderOptions {
            star_vertex: Some(0),
            ..Default::default()
        };
        let svg = render_triangulation(&g, &opts);
        // the star is one extra polygon
        assert_eq!(count_occurrences(&svg, "<polygon "), 1);
    }
}
