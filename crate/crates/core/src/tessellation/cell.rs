//! The Voronoi cell of the origin atom of a Palm realization, by clipping a
//! box with bisector half-planes.

use serde::{Deserialize, Serialize};

use super::{polygon_area, TessellationError};
use crate::geometry::Point2;
use crate::sampler::Realization;

/// Shape statistics of the typical cell, measured in the frame where the
/// typical line is the x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellExtent {
    /// Length of the cell's intersection with the positive perpendicular axis.
    pub s_plus: f64,
    /// Same for the negative perpendicular axis.
    pub s_minus: f64,
    /// Extent of the cell parallel to the typical line, `max x − min x`.
    pub width: f64,
    pub area: f64,
}

impl CellExtent {
    /// `s_plus + s_minus`, the length of the cell's perpendicular section.
    pub fn length(&self) -> f64 {
        self.s_plus + self.s_minus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypicalCell {
    /// Counterclockwise vertices.
    pub polygon: Vec<Point2>,
    /// Points whose bisectors were applied, nearest first.
    pub constraints: Vec<Point2>,
    /// Angle of the typical line.
    pub axis_angle: f64,
}

/// Keeps the part of convex `poly` where `x·q ≤ |q|²/2`.
fn clip(poly: &[Point2], q: Point2) -> Vec<Point2> {
    let half = 0.5 * q.norm_squared();
    let side = |p: Point2| p.dot(q) - half;
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (fa, fb) = (side(a), side(b));
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Cell of the origin atom. Points are applied in order of distance until
/// the next one is farther than twice the cell's circumradius; the result is
/// exact when that radius fits in the simulation window, and an
/// [`TessellationError::InsufficientWindow`] otherwise.
pub fn typical_cell(real: &Realization) -> Result<TypicalCell, TessellationError> {
    let origin_first = real.points.first().is_some_and(|p| p.position == Point2::ORIGIN);
    if !real.palm || !origin_first {
        return Err(TessellationError::NotPalm);
    }
    let s = real.sim_radius;
    let mut polygon = vec![
        Point2::new(-s, -s),
        Point2::new(s, -s),
        Point2::new(s, s),
        Point2::new(-s, s),
    ];
    let mut others: Vec<Point2> = real.points[1..].iter().map(|p| p.position).collect();
    others.sort_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()));

    let radius2 = |poly: &[Point2]| poly.iter().map(|p| p.norm_squared()).fold(0.0, f64::max);
    let mut reach2 = radius2(&polygon);
    let mut constraints = Vec::new();
    for q in others {
        if q.norm_squared() > 4.0 * reach2 {
            break;
        }
        polygon = clip(&polygon, q);
        reach2 = radius2(&polygon);
        constraints.push(q);
    }
    let required = 2.0 * reach2.sqrt();
    if required > s {
        return Err(TessellationError::InsufficientWindow { required, available: s });
    }
    let axis_angle = real.lines.first().map_or(0.0, |l| l.theta());
    Ok(TypicalCell {
        polygon,
        constraints,
        axis_angle,
    })
}

impl TypicalCell {
    /// Distance from the origin to the cell boundary along `direction`
    /// (unit vector).
    pub fn reach(&self, direction: Point2) -> f64 {
        self.constraints
            .iter()
            .filter_map(|q| {
                let along = q.dot(direction);
                (along > 0.0).then(|| 0.5 * q.norm_squared() / along)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn extent(&self) -> CellExtent {
        let (sin, cos) = self.axis_angle.sin_cos();
        let parallel = Point2::new(cos, sin);
        let perpendicular = Point2::new(-sin, cos);
        let (lo, hi) = self
            .polygon
            .iter()
            .map(|p| p.dot(parallel))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        CellExtent {
            s_plus: self.reach(perpendicular),
            s_minus: self.reach(perpendicular * -1.0),
            width: hi - lo,
            area: polygon_area(&self.polygon),
        }
    }
}

/// [`CellExtent`] of the typical cell of a Palm realization.
pub fn typical_cell_extent(real: &Realization) -> Result<CellExtent, TessellationError> {
    Ok(typical_cell(real)?.extent())
}
