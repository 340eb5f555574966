//! Lines on the cylinder set `ℝ × [0, π)` and the maps between line
//! coordinates and the plane.
//!
//! A line is parameterized by its signed distance `r` from the origin and its
//! angle `theta` with the x-axis. The point at arc coordinate `t` is
//! `(t cos θ − r sin θ, t sin θ + r cos θ)`, so `t = 0` is the foot of the
//! perpendicular dropped from the origin.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("line at distance {r} misses the disk of radius {radius}")]
    LineMissesWindow { r: f64, radius: f64 },
    #[error("window radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("non-finite line parameters (r={r}, theta={theta})")]
    NonFiniteLine { r: f64, theta: f64 },
}

/// A planar point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn distance_squared(self, other: Point2) -> f64 {
        (self - other).norm_squared()
    }

    /// Rotates counterclockwise about the origin.
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

/// A line in canonical cylinder coordinates: `theta ∈ [0, π)`, `r ∈ ℝ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineParams {
    r: f64,
    theta: f64,
}

impl LineParams {
    /// Builds the canonical parameters of the undirected line `(r, theta)`.
    ///
    /// `theta` is reduced modulo `π`; every odd wrap flips the sign of `r`,
    /// because `(r, θ + π)` and `(−r, θ)` describe the same line.
    pub fn new(r: f64, theta: f64) -> Result<Self, GeometryError> {
        if !r.is_finite() || !theta.is_finite() {
            return Err(GeometryError::NonFiniteLine { r, theta });
        }
        let turns = (theta / PI).floor();
        let mut reduced = theta - turns * PI;
        let mut r = r;
        if (turns as i64).rem_euclid(2) == 1 {
            r = -r;
        }
        // Rounding can land exactly on π.
        if reduced >= PI {
            reduced -= PI;
            r = -r;
        }
        if reduced < 0.0 {
            reduced = 0.0;
        }
        Ok(LineParams { r, theta: reduced })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Unit direction vector `(cos θ, sin θ)` of increasing `t`.
    pub fn direction(&self) -> Point2 {
        let (s, c) = self.theta.sin_cos();
        Point2::new(c, s)
    }

    /// The same line after rotating the plane counterclockwise by `angle`.
    pub fn rotated(&self, angle: f64) -> LineParams {
        LineParams::new(self.r, self.theta + angle).expect("finite rotation of a finite line")
    }
}

/// The point at arc coordinate `t` on `line`.
pub fn line_point(line: &LineParams, t: f64) -> Point2 {
    let (s, c) = line.theta.sin_cos();
    Point2::new(t * c - line.r * s, t * s + line.r * c)
}

/// Perpendicular distance from `p` to `line`.
pub fn distance_to_line(p: Point2, line: &LineParams) -> f64 {
    let (s, c) = line.theta.sin_cos();
    (p.x * s - p.y * c + line.r).abs()
}

/// Half-length `√(R² − r²)` of the chord that a line at signed distance `r`
/// cuts from the disk of radius `radius`.
pub fn chord_half_length(r: f64, radius: f64) -> Result<f64, GeometryError> {
    if r.abs() > radius {
        return Err(GeometryError::LineMissesWindow { r, radius });
    }
    Ok(((radius - r) * (radius + r)).max(0.0).sqrt())
}

/// A disk centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskWindow {
    radius: f64,
}

impl DiskWindow {
    pub fn new(radius: f64) -> Result<Self, GeometryError> {
        if radius > 0.0 && radius.is_finite() {
            Ok(DiskWindow { radius })
        } else {
            Err(GeometryError::InvalidRadius(radius))
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.norm_squared() <= self.radius * self.radius
    }

    /// Arc-coordinate interval `[-h, h]` of `line` inside the disk, if any.
    pub fn chord(&self, line: &LineParams) -> Option<f64> {
        chord_half_length(line.r, self.radius).ok()
    }
}
