//! Incremental Delaunay triangulation (Bowyer–Watson) with ghost triangles.
//!
//! Every hull edge `a → b` (outside on its left) carries a ghost triangle
//! `(a, b, INF)`, so points outside the hull are inserted the same way as
//! points inside it. Orientation and in-circle signs come from adaptive exact
//! predicates; coordinates stay `f64`.

use robust::{incircle, orient2d, Coord};

use crate::geometry::Point2;

pub(crate) const INF: usize = usize::MAX;
const NONE: usize = usize::MAX;

fn coord(p: Point2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Positive iff `a, b, c` turn counterclockwise; exact sign.
pub(crate) fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    orient2d(coord(a), coord(b), coord(c))
}

/// Positive iff `d` lies strictly inside the circle through the
/// counterclockwise triangle `a, b, c`; exact sign.
pub(crate) fn in_circle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    incircle(coord(a), coord(b), coord(c), coord(d))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Triangle {
    /// Counterclockwise; at most one entry is `INF`.
    pub v: [usize; 3],
    /// `n[i]` is the triangle across the edge opposite `v[i]`.
    pub n: [usize; 3],
    alive: bool,
}

impl Triangle {
    pub fn is_ghost(&self) -> bool {
        self.v.contains(&INF)
    }

    pub fn index_of(&self, vertex: usize) -> Option<usize> {
        self.v.iter().position(|&v| v == vertex)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Build {
    /// Fewer than three points or all points on one line; the indices are
    /// sorted along that line.
    Collinear(Vec<usize>),
    Triangulated(Triangulation),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Triangulation {
    pub points: Vec<Point2>,
    pub triangles: Vec<Triangle>,
    /// One live triangle incident to each vertex.
    pub incident: Vec<usize>,
}

impl PartialEq for Triangle {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v && self.n == other.n && self.alive == other.alive
    }
}

/// Two input points with identical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Duplicate(pub usize, pub usize);

/// Position along the Hilbert curve of a `2^16 × 2^16` grid.
fn hilbert_index(mut x: u32, mut y: u32) -> u64 {
    let n: u32 = 1 << 16;
    let mut d: u64 = 0;
    let mut s = n / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

fn hilbert_order(points: &[Point2]) -> Vec<usize> {
    let (mut lo, mut hi) = (
        Point2::new(f64::INFINITY, f64::INFINITY),
        Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in points {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
    let scale = f64::from((1u32 << 16) - 1) / span;
    let mut keyed: Vec<(u64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let gx = ((p.x - lo.x) * scale) as u32;
            let gy = ((p.y - lo.y) * scale) as u32;
            (hilbert_index(gx, gy), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn lexicographic(a: Point2, b: Point2) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

/// Finds the first pair of equal points, if any.
fn find_duplicate(points: &[Point2]) -> Option<Duplicate> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| lexicographic(points[i], points[j]).then(i.cmp(&j)));
    order
        .windows(2)
        .find(|w| points[w[0]] == points[w[1]])
        .map(|w| Duplicate(w[0], w[1]))
}

/// Triangulates `points`, or reports that they are collinear.
pub(crate) fn triangulate(points: &[Point2]) -> Result<Build, Duplicate> {
    if let Some(d) = find_duplicate(points) {
        return Err(d);
    }
    let order = hilbert_order(points);
    let seed = order.len().checked_sub(2).and_then(|_| {
        let (a, b) = (order[0], order[1]);
        order[2..]
            .iter()
            .copied()
            .find(|&c| orient(points[a], points[b], points[c]) != 0.0)
            .map(|c| (a, b, c))
    });
    let Some((a, b, c)) = seed else {
        let mut sorted: Vec<usize> = (0..points.len()).collect();
        sorted.sort_by(|&i, &j| lexicographic(points[i], points[j]));
        return Ok(Build::Collinear(sorted));
    };
    let mut t = Triangulation {
        points: points.to_vec(),
        triangles: Vec::with_capacity(2 * points.len() + 4),
        incident: vec![NONE; points.len()],
    };
    t.seed(a, b, c);
    let mut hint = 0;
    let mut free = Vec::new();
    for &p in &order {
        if p == a || p == b || p == c {
            continue;
        }
        hint = t.insert(p, hint, &mut free);
    }
    t.finish();
    Ok(Build::Triangulated(t))
}

impl Triangulation {
    fn seed(&mut self, a: usize, b: usize, c: usize) {
        let (a, b, c) = if orient(self.points[a], self.points[b], self.points[c]) > 0.0 {
            (a, b, c)
        } else {
            (a, c, b)
        };
        // 0 = real triangle; 1, 2, 3 = ghosts across edges bc, ca, ab.
        self.triangles.push(Triangle {
            v: [a, b, c],
            n: [1, 2, 3],
            alive: true,
        });
        self.triangles.push(Triangle {
            v: [c, b, INF],
            n: [3, 2, 0],
            alive: true,
        });
        self.triangles.push(Triangle {
            v: [a, c, INF],
            n: [1, 3, 0],
            alive: true,
        });
        self.triangles.push(Triangle {
            v: [b, a, INF],
            n: [2, 1, 0],
            alive: true,
        });
    }

    fn point(&self, v: usize) -> Point2 {
        self.points[v]
    }

    /// Whether `p` lies strictly inside the circumcircle of `t`. For a ghost
    /// `(a, b, INF)` the circle degenerates to the open half-plane left of
    /// `a → b` plus the open segment `ab`.
    fn in_conflict(&self, tri: usize, p: Point2) -> bool {
        let t = &self.triangles[tri];
        match t.index_of(INF) {
            None => in_circle(self.point(t.v[0]), self.point(t.v[1]), self.point(t.v[2]), p) > 0.0,
            Some(k) => {
                let a = self.point(t.v[(k + 1) % 3]);
                let b = self.point(t.v[(k + 2) % 3]);
                let o = orient(a, b, p);
                o > 0.0 || (o == 0.0 && (p - a).dot(b - a) > 0.0 && (p - b).dot(a - b) > 0.0)
            }
        }
    }

    /// Visibility walk to a triangle in conflict with `p`.
    fn locate(&self, p: Point2, hint: usize) -> usize {
        let mut tri = if self.triangles[hint].alive {
            hint
        } else {
            self.any_real()
        };
        if self.triangles[tri].is_ghost() {
            let t = &self.triangles[tri];
            tri = t.n[t.index_of(INF).expect("ghost")];
        }
        let limit = 4 * self.triangles.len() + 16;
        let mut rotation = 0;
        'walk: for _ in 0..limit {
            let t = &self.triangles[tri];
            if t.is_ghost() {
                return tri;
            }
            rotation = (rotation + 1) % 3;
            for j in 0..3 {
                let i = (j + rotation) % 3;
                let a = self.point(t.v[(i + 1) % 3]);
                let b = self.point(t.v[(i + 2) % 3]);
                if orient(a, b, p) < 0.0 {
                    tri = t.n[i];
                    continue 'walk;
                }
            }
            return tri;
        }
        // Exhausted; cannot happen for a Delaunay triangulation but stays safe.
        (0..self.triangles.len())
            .find(|&i| self.triangles[i].alive && self.in_conflict(i, p))
            .expect("some triangle conflicts with a new point")
    }

    fn any_real(&self) -> usize {
        self.triangles
            .iter()
            .position(|t| t.alive && !t.is_ghost())
            .expect("triangulation has a real triangle")
    }

    fn insert(&mut self, vertex: usize, hint: usize, free: &mut Vec<usize>) -> usize {
        let p = self.point(vertex);
        let start = self.locate(p, hint);

        let mut cavity = vec![start];
        let mut in_cavity = std::collections::HashSet::from([start]);
        let mut stack = vec![start];
        while let Some(t) = stack.pop() {
            for &nb in &self.triangles[t].n {
                if !in_cavity.contains(&nb) && self.in_conflict(nb, p) {
                    in_cavity.insert(nb);
                    cavity.push(nb);
                    stack.push(nb);
                }
            }
        }

        // Boundary edges (e0 → e1) of the cavity with the triangle outside.
        let mut boundary = Vec::new();
        for &t in &cavity {
            let tri = self.triangles[t];
            for i in 0..3 {
                if !in_cavity.contains(&tri.n[i]) {
                    boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], tri.n[i]));
                }
            }
        }
        for &t in &cavity {
            self.triangles[t].alive = false;
            free.push(t);
        }

        let mut by_start = std::collections::HashMap::with_capacity(boundary.len());
        let mut created = Vec::with_capacity(boundary.len());
        for &(e0, e1, outside) in &boundary {
            let id = match free.pop() {
                Some(id) => id,
                None => {
                    self.triangles.push(Triangle {
                        v: [0; 3],
                        n: [NONE; 3],
                        alive: false,
                    });
                    self.triangles.len() - 1
                }
            };
            self.triangles[id] = Triangle {
                v: [vertex, e0, e1],
                n: [outside, NONE, NONE],
                alive: true,
            };
            let back = self.triangles[outside]
                .v
                .iter()
                .position(|&w| w != e0 && w != e1)
                .expect("outer triangle has an opposite vertex");
            self.triangles[outside].n[back] = id;
            by_start.insert(e0, id);
            created.push(id);
        }
        for &id in &created {
            let [_, _, e1] = self.triangles[id].v;
            // Across edge e1 → p lies the fan triangle starting at e1.
            let next = by_start[&e1];
            self.triangles[id].n[1] = next;
            self.triangles[next].n[2] = id;
        }
        created
            .iter()
            .copied()
            .find(|&t| !self.triangles[t].is_ghost())
            .unwrap_or(created[0])
    }

    fn finish(&mut self) {
        for (i, t) in self.triangles.iter().enumerate() {
            if t.alive {
                for &v in &t.v {
                    if v != INF {
                        self.incident[v] = i;
                    }
                }
            }
        }
    }

    pub fn live(&self) -> impl Iterator<Item = (usize, &Triangle)> {
        self.triangles.iter().enumerate().filter(|(_, t)| t.alive)
    }

    /// Triangles around `vertex` in counterclockwise order.
    pub fn star(&self, vertex: usize) -> Vec<usize> {
        let first = self.incident[vertex];
        let mut out = vec![first];
        let mut t = first;
        loop {
            let tri = &self.triangles[t];
            let k = tri.index_of(vertex).expect("vertex in its star");
            t = tri.n[(k + 1) % 3];
            if t == first {
                return out;
            }
            out.push(t);
        }
    }

    /// Number of exactly cocircular certificates: interior edges whose two
    /// triangles share a circumcircle.
    pub fn cocircular_edges(&self) -> usize {
        let mut count = 0;
        for (i, t) in self.live() {
            if t.is_ghost() {
                continue;
            }
            for k in 0..3 {
                let j = t.n[k];
                if j < i || self.triangles[j].is_ghost() {
                    continue;
                }
                let other = &self.triangles[j];
                let opposite = other
                    .v
                    .iter()
                    .copied()
                    .find(|w| !t.v.contains(w))
                    .expect("adjacent triangles differ in one vertex");
                let [a, b, c] = t.v.map(|v| self.point(v));
                if in_circle(a, b, c, self.point(opposite)) == 0.0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// Structural and empty-circle checks; used by tests.
    #[cfg(test)]
    pub fn validate(&self) -> Result<(), String> {
        for (i, t) in self.live() {
            for k in 0..3 {
                let j = t.n[k];
                let other = &self.triangles[j];
                if !other.alive {
                    return Err(format!("triangle {i} points at dead {j}"));
                }
                if !other.n.contains(&i) {
                    return Err(format!("adjacency {i} -> {j} not symmetric"));
                }
            }
            if t.is_ghost() {
                continue;
            }
            let [a, b, c] = t.v.map(|v| self.point(v));
            if orient(a, b, c) <= 0.0 {
                return Err(format!("triangle {i} not counterclockwise"));
            }
            for k in 0..3 {
                let j = t.n[k];
                if let Some(opp) = self.triangles[j].v.iter().find(|w| !t.v.contains(w)) {
                    if *opp != INF && in_circle(a, b, c, self.point(*opp)) > 0.0 {
                        return Err(format!("edge between {i} and {j} is not locally Delaunay"));
                    }
                }
            }
        }
        Ok(())
    }
}
