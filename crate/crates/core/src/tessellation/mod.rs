//! Voronoi tessellation of a realization, facet counting with minus
//! sampling, the cocircularity census and the typical cell.

mod cell;
mod delaunay;

use std::collections::HashMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;
use crate::sampler::{ModelParams, Realization};

pub use cell::{typical_cell, typical_cell_extent, CellExtent, TypicalCell};

use delaunay::{orient, triangulate, Build, Triangulation, INF};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TessellationError {
    #[error("a tessellation needs at least one generator")]
    Empty,
    #[error("points {first} and {second} coincide")]
    DegenerateInput { first: usize, second: usize },
    #[error("{name} out of domain: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("the typical cell needs a Palm realization")]
    NotPalm,
    #[error("typical cell not certified: it needs a simulation radius of {required}, have {available}")]
    InsufficientWindow { required: f64, available: f64 },
}

/// A Voronoi edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeKind {
    Segment {
        from: usize,
        to: usize,
    },
    /// Starts at a vertex and runs to infinity along `direction`.
    Ray {
        from: usize,
        direction: Point2,
    },
    /// The full bisector of two generators; only when all generators are
    /// collinear.
    Line {
        through: Point2,
        direction: Point2,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    /// The two generators whose cells share this edge.
    pub generators: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub generator: usize,
    /// Boundary vertices in counterclockwise order. For an unbounded cell
    /// the list is a chain between its two rays.
    pub vertices: Vec<usize>,
    /// Boundary edges in the same counterclockwise order.
    pub edges: Vec<usize>,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tessellation {
    pub generators: Vec<Point2>,
    pub vertices: Vec<Point2>,
    pub edges: Vec<Edge>,
    /// `cells[i]` belongs to `generators[i]`.
    pub cells: Vec<Cell>,
    /// Observation radius of the source realization.
    pub window_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetCounts {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountedFacets {
    pub counts: FacetCounts,
    pub counting_radius: f64,
}

fn circumcenter(a: Point2, b: Point2, c: Point2) -> Point2 {
    let b = b - a;
    let c = c - a;
    let d = 2.0 * (b.x * c.y - b.y * c.x);
    let bb = b.norm_squared();
    let cc = c.norm_squared();
    a + Point2::new((c.y * bb - b.y * cc) / d, (b.x * cc - c.x * bb) / d)
}

/// Left normal of `b − a`, normalized.
fn left_normal(a: Point2, b: Point2) -> Point2 {
    let d = b - a;
    Point2::new(-d.y, d.x) * (1.0 / d.norm())
}

/// Voronoi diagram of all points of `real`.
pub fn build_voronoi(real: &Realization) -> Result<Tessellation, TessellationError> {
    voronoi_of(&real.positions(), real.obs_radius)
}

/// Voronoi diagram of arbitrary distinct generators.
pub fn voronoi_of(generators: &[Point2], window_radius: f64) -> Result<Tessellation, TessellationError> {
    if generators.is_empty() {
        return Err(TessellationError::Empty);
    }
    if let Some(p) = generators.iter().find(|p| !p.is_finite()) {
        return Err(TessellationError::Domain {
            name: "generator",
            value: if p.x.is_finite() { p.y } else { p.x },
        });
    }
    match triangulate(generators) {
        Err(d) => Err(TessellationError::DegenerateInput {
            first: d.0.min(d.1),
            second: d.0.max(d.1),
        }),
        Ok(Build::Collinear(order)) => Ok(collinear_voronoi(generators, &order, window_radius)),
        Ok(Build::Triangulated(t)) => Ok(dual(t, window_radius)),
    }
}

fn collinear_voronoi(generators: &[Point2], order: &[usize], window_radius: f64) -> Tessellation {
    let mut cells: Vec<Cell> = (0..generators.len())
        .map(|g| Cell {
            generator: g,
            vertices: Vec::new(),
            edges: Vec::new(),
            bounded: false,
        })
        .collect();
    let mut edges = Vec::new();
    for w in order.windows(2) {
        let (a, b) = (generators[w[0]], generators[w[1]]);
        let id = edges.len();
        edges.push(Edge {
            kind: EdgeKind::Line {
                through: (a + b) * 0.5,
                direction: left_normal(a, b),
            },
            generators: (w[0], w[1]),
        });
        cells[w[0]].edges.push(id);
        cells[w[1]].edges.push(id);
    }
    Tessellation {
        generators: generators.to_vec(),
        vertices: Vec::new(),
        edges,
        cells,
        window_radius,
    }
}

fn dual(t: Triangulation, window_radius: f64) -> Tessellation {
    let mut vertex_of = vec![usize::MAX; t.triangles.len()];
    let mut vertices = Vec::new();
    for (i, tri) in t.live() {
        if !tri.is_ghost() {
            let [a, b, c] = tri.v.map(|v| t.points[v]);
            vertex_of[i] = vertices.len();
            vertices.push(circumcenter(a, b, c));
        }
    }

    // One Voronoi edge per Delaunay edge with at least one real triangle.
    let mut edges = Vec::new();
    let mut edge_of: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, tri) in t.live() {
        if tri.is_ghost() {
            continue;
        }
        for k in 0..3 {
            let (u, w) = (tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]);
            let key = (u.min(w), u.max(w));
            if edge_of.contains_key(&key) {
                continue;
            }
            let j = tri.n[k];
            let kind = if t.triangles[j].is_ghost() {
                // Hull edge u → w with the triangle on its left: the ray
                // leaves through the right side.
                EdgeKind::Ray {
                    from: vertex_of[i],
                    direction: left_normal(t.points[w], t.points[u]),
                }
            } else {
                EdgeKind::Segment {
                    from: vertex_of[i],
                    to: vertex_of[j],
                }
            };
            edge_of.insert(key, edges.len());
            edges.push(Edge { kind, generators: key });
        }
    }

    let mut cells = Vec::with_capacity(t.points.len());
    for g in 0..t.points.len() {
        let mut star = t.star(g);
        let m = star.len();
        let is_ghost = |i: usize| t.triangles[star[i % m]].is_ghost();
        let ghost_at = (0..m).find(|&i| is_ghost(i) && !is_ghost(i + 1));
        if let Some(pos) = ghost_at {
            // Start right after the ghosts so the chain runs ray → … → ray.
            star.rotate_left(pos + 1);
        }
        let mut cell = Cell {
            generator: g,
            vertices: Vec::new(),
            edges: Vec::new(),
            bounded: ghost_at.is_none(),
        };
        for &s in &star {
            let tri = &t.triangles[s];
            let k = tri.index_of(g).expect("generator in its star");
            // The edge g – v[k+1] separates this triangle from the previous
            // one; the edge towards INF has no Voronoi counterpart.
            let prev = tri.v[(k + 1) % 3];
            if prev != INF {
                cell.edges.push(edge_of[&(g.min(prev), g.max(prev))]);
            }
            if !tri.is_ghost() {
                cell.vertices.push(vertex_of[s]);
            }
        }
        cells.push(cell);
    }
    Tessellation {
        generators: t.points,
        vertices,
        edges,
        cells,
        window_radius,
    }
}

impl Tessellation {
    /// Default minus-sampling radius: the window shrunk by about two mean
    /// nearest-neighbour spacings, `2/√(π μ λ_l)`.
    pub fn default_counting_radius(window_radius: f64, params: &ModelParams) -> f64 {
        window_radius - 2.0 / (std::f64::consts::PI * params.mu * params.lambda_l).sqrt()
    }

    /// Counts vertices and generators strictly inside `B(0, counting_radius)`
    /// and edges whose midpoint is; unbounded edges are never counted.
    pub fn facet_counts(&self, counting_radius: f64) -> Result<CountedFacets, TessellationError> {
        if !(counting_radius >= 0.0 && counting_radius <= self.window_radius) {
            return Err(TessellationError::Domain {
                name: "counting_radius",
                value: counting_radius,
            });
        }
        let r2 = counting_radius * counting_radius;
        let inside = |p: Point2| p.norm_squared() < r2;
        let n_vertices = self.vertices.iter().filter(|&&v| inside(v)).count();
        let n_cells = self.generators.iter().filter(|&&g| inside(g)).count();
        let n_edges = self
            .edges
            .iter()
            .filter(|e| match e.kind {
                EdgeKind::Segment { from, to } => inside((self.vertices[from] + self.vertices[to]) * 0.5),
                _ => false,
            })
            .count();
        Ok(CountedFacets {
            counts: FacetCounts {
                n_vertices,
                n_edges,
                n_cells,
            },
            counting_radius,
        })
    }

    /// Index of the generator nearest to `p`, found by walking the dual
    /// graph from `start`.
    pub fn locate_cell(&self, p: Point2, start: usize) -> usize {
        let mut current = start;
        loop {
            let d = self.generators[current].distance_squared(p);
            let better = self.cells[current]
                .edges
                .iter()
                .map(|&e| {
                    let (a, b) = self.edges[e].generators;
                    if a == current {
                        b
                    } else {
                        a
                    }
                })
                .find(|&n| self.generators[n].distance_squared(p) < d);
            match better {
                Some(n) => current = n,
                None => return current,
            }
        }
    }

    /// Vertex polygon of a bounded cell.
    pub fn cell_polygon(&self, generator: usize) -> Option<Vec<Point2>> {
        let cell = &self.cells[generator];
        cell.bounded
            .then(|| cell.vertices.iter().map(|&v| self.vertices[v]).collect())
    }

    /// Writes the `[vertices]`, `[edges]` and `[cells]` CSV sections.
    pub fn write_dump<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "[vertices]")?;
        writeln!(out, "id,x,y")?;
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(out, "{i},{},{}", v.x, v.y)?;
        }
        writeln!(out, "[edges]")?;
        writeln!(out, "id,v1,v2,dir_x,dir_y,generator_a,generator_b")?;
        for (i, e) in self.edges.iter().enumerate() {
            let (ga, gb) = e.generators;
            match e.kind {
                EdgeKind::Segment { from, to } => writeln!(out, "{i},{from},{to},,,{ga},{gb}")?,
                EdgeKind::Ray { from, direction } => {
                    writeln!(out, "{i},{from},,{},{},{ga},{gb}", direction.x, direction.y)?
                }
                EdgeKind::Line { direction, .. } => writeln!(out, "{i},,,{},{},{ga},{gb}", direction.x, direction.y)?,
            }
        }
        writeln!(out, "[cells]")?;
        writeln!(out, "generator_id,bounded,vertex_ids")?;
        for c in &self.cells {
            let ids: Vec<String> = c.vertices.iter().map(usize::to_string).collect();
            writeln!(out, "{},{},{}", c.generator, c.bounded, ids.join(" "))?;
        }
        Ok(())
    }
}

/// Counts exactly cocircular quadruples among the Delaunay certificates of
/// the realization's points: interior Delaunay edges whose two triangles
/// share a circumcircle, by exact in-circle evaluation.
pub fn gqp_census(real: &Realization) -> Result<usize, TessellationError> {
    census_of(&real.positions())
}

pub fn census_of(points: &[Point2]) -> Result<usize, TessellationError> {
    match triangulate(points) {
        Err(d) => Err(TessellationError::DegenerateInput {
            first: d.0.min(d.1),
            second: d.0.max(d.1),
        }),
        Ok(Build::Collinear(_)) => Ok(0),
        Ok(Build::Triangulated(t)) => Ok(t.cocircular_edges()),
    }
}

/// Polygon area by the shoelace formula (positive for counterclockwise).
pub fn polygon_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.x * b.y - a.y * b.x
        })
        .sum::<f64>()
        * 0.5
}

/// Whether `poly` is strictly convex and counterclockwise (exact turns).
pub fn is_convex(poly: &[Point2]) -> bool {
    let n = poly.len();
    n >= 3 && (0..n).all(|i| orient(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) >= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_stationary, SeedSpec};

    fn square() -> Vec<Point2> {
        vec![
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, -1.0),
        ]
    }

    #[test]
    fn one_point() {
        let t = voronoi_of(&[Point2::new(0.3, 0.1)], 1.0).unwrap();
        assert!(t.vertices.is_empty() && t.edges.is_empty());
        assert_eq!(t.cells.len(), 1);
        assert!(!t.cells[0].bounded);
    }

    #[test]
    fn three_points() {
        let pts = [Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 2.0)];
        let t = voronoi_of(&pts, 10.0).unwrap();
        assert_eq!(t.vertices.len(), 1);
        assert!((t.vertices[0].x - 1.0).abs() < 1e-15 && (t.vertices[0].y - 1.0).abs() < 1e-15);
        assert_eq!(t.edges.len(), 3);
        assert!(t.edges.iter().all(|e| matches!(e.kind, EdgeKind::Ray { .. })));
        for c in &t.cells {
            assert!(!c.bounded);
            assert_eq!(c.edges.len(), 2);
            assert_eq!(c.vertices, vec![0]);
        }
        // Each ray points away from its generators' midpoint.
        for e in &t.edges {
            if let EdgeKind::Ray { from, direction } = e.kind {
                let m = (pts[e.generators.0] + pts[e.generators.1]) * 0.5;
                let probe = t.vertices[from] + direction * 100.0;
                assert!(probe.distance(m) > t.vertices[from].distance(m));
            }
        }
    }

    #[test]
    fn collinear_generators() {
        let pts: Vec<Point2> = (0..4).map(|i| Point2::new(i as f64, i as f64)).collect();
        let t = voronoi_of(&pts, 10.0).unwrap();
        assert_eq!(t.vertices.len(), 0);
        assert_eq!(t.edges.len(), 3);
        assert_eq!(t.cells[1].edges.len(), 2);
        assert_eq!(
            t.facet_counts(5.0).unwrap().counts,
            FacetCounts {
                n_vertices: 0,
                n_edges: 0,
                n_cells: 4
            }
        );
    }

    #[test]
    fn duplicates_and_empty() {
        assert_eq!(voronoi_of(&[], 1.0).unwrap_err(), TessellationError::Empty);
        let pts = [Point2::new(1.0, 1.0), Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)];
        assert_eq!(
            voronoi_of(&pts, 1.0).unwrap_err(),
            TessellationError::DegenerateInput { first: 0, second: 2 }
        );
    }

    #[test]
    fn crafted_cocircular_fixture() {
        assert!(census_of(&square()).unwrap() >= 1);
        let mut shifted = square();
        shifted[0].x += 1e-9;
        assert_eq!(census_of(&shifted).unwrap(), 0);
    }

    #[test]
    fn hexagonal_ring_cell_is_bounded() {
        let mut pts = vec![Point2::ORIGIN];
        pts.extend((0..6).map(|k| Point2::new(1.0, 0.0).rotated(k as f64 * std::f64::consts::PI / 3.0 + 0.1)));
        let t = voronoi_of(&pts, 10.0).unwrap();
        let c = &t.cells[0];
        assert!(c.bounded);
        assert_eq!(c.vertices.len(), 6);
        assert_eq!(c.edges.len(), 6);
        let poly = t.cell_polygon(0).unwrap();
        assert!(is_convex(&poly));
        // Regular hexagon with apothem 1/2.
        let expected = 6.0 * 0.25 * (std::f64::consts::PI / 6.0).tan();
        assert!((polygon_area(&poly) - expected).abs() < 1e-12);
    }

    #[test]
    fn facet_count_domain() {
        let t = voronoi_of(&square(), 2.0).unwrap();
        assert!(t.facet_counts(3.0).is_err());
        assert!(t.facet_counts(-1.0).is_err());
        assert_eq!(
            t.facet_counts(0.0).unwrap().counts,
            FacetCounts {
                n_vertices: 0,
                n_edges: 0,
                n_cells: 0
            }
        );
    }

    #[test]
    fn sampled_tessellation_invariants() {
        let params = ModelParams::isotropic(1.0, 2.0).unwrap();
        for rep in 0..5 {
            let real = sample_stationary(&params, 6.0, 2.0, SeedSpec::new(11, rep)).unwrap();
            let t = build_voronoi(&real).unwrap();
            let pts = real.positions();
            assert_eq!(t.cells.len(), pts.len());
            let mut degree = vec![0usize; t.vertices.len()];
            for e in &t.edges {
                match e.kind {
                    EdgeKind::Segment { from, to } => {
                        degree[from] += 1;
                        degree[to] += 1;
                    }
                    EdgeKind::Ray { from, .. } => degree[from] += 1,
                    EdgeKind::Line { .. } => {}
                }
            }
            assert!(degree.iter().all(|&d| d == 3));
            for c in &t.cells {
                if let Some(poly) = t.cell_polygon(c.generator) {
                    assert!(is_convex(&poly));
                    assert_eq!(c.edges.len(), c.vertices.len());
                } else {
                    assert_eq!(c.edges.len(), c.vertices.len() + 1);
                }
            }
            // Each vertex is equidistant from the generators of its edges.
            for e in &t.edges {
                let (a, b) = e.generators;
                if let EdgeKind::Segment { from, .. } | EdgeKind::Ray { from, .. } = e.kind {
                    let v = t.vertices[from];
                    let (da, db) = (v.distance(pts[a]), v.distance(pts[b]));
                    assert!((da - db).abs() <= 1e-9 * (1.0 + da));
                }
            }
            let counted = t.facet_counts(real.obs_radius).unwrap().counts;
            assert!(counted.n_cells <= pts.len());
            assert_eq!(gqp_census(&real).unwrap(), 0);
        }
    }

    #[test]
    fn probes_land_in_nearest_generator_cell() {
        let params = ModelParams::isotropic(1.0, 3.0).unwrap();
        let real = sample_stationary(&params, 5.0, 2.0, SeedSpec::new(5, 0)).unwrap();
        let t = build_voronoi(&real).unwrap();
        let pts = real.positions();
        let mut state = 0x2545_F491_4F6C_DD1Du64;
        for i in 0..1000 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let v = ((state.wrapping_mul(0x9E37_79B9_7F4A_7C15)) >> 11) as f64 / (1u64 << 53) as f64;
            let probe = Point2::new(10.0 * u - 5.0, 10.0 * v - 5.0);
            let brute = (0..pts.len())
                .min_by(|&a, &b| {
                    pts[a]
                        .distance_squared(probe)
                        .total_cmp(&pts[b].distance_squared(probe))
                })
                .unwrap();
            let found = t.locate_cell(probe, i % pts.len());
            assert_eq!(pts[found].distance_squared(probe), pts[brute].distance_squared(probe));
            if let Some(poly) = t.cell_polygon(found) {
                let n = poly.len();
                assert!((0..n).all(|k| orient(poly[k], poly[(k + 1) % n], probe) >= -1e-12));
            }
        }
        // Every generator lies in its own bounded cell.
        for c in &t.cells {
            if let Some(poly) = t.cell_polygon(c.generator) {
                let g = pts[c.generator];
                let n = poly.len();
                assert!((0..n).all(|k| orient(poly[k], poly[(k + 1) % n], g) > 0.0));
            }
        }
    }

    #[test]
    fn dump_sections() {
        let t = voronoi_of(&square(), 2.0).unwrap();
        let mut buf = Vec::new();
        t.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("[vertices]\nid,x,y\n"));
        assert!(text.contains("[edges]\nid,v1,v2,dir_x,dir_y,generator_a,generator_b\n"));
        assert!(text.contains("[cells]\ngenerator_id,bounded,vertex_ids\n"));
    }
}
