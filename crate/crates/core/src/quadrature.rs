//! Adaptive Gauss–Legendre quadrature.
//!
//! Each panel is integrated with a 15-point Gauss–Legendre rule and with the
//! same rule on its two halves; the difference is the panel's error estimate.
//! Panels are refined globally, worst first, until the summed error meets the
//! requested tolerance. Semi-infinite ranges are covered by consecutive
//! segments of doubling width, stopped once a segment contributes less than
//! the tail tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const ORDER: usize = 15;
const MAX_DOUBLINGS: usize = 80;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge after {subdivisions} subdivisions (value {value}, error estimate {error})")]
    NotConverged {
        value: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand not negligible at infinity: last segment ending at {reached} still contributes {tail_bound}")]
    Truncation { reached: f64, tail_bound: f64 },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },
    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(&'static str),
}

/// Tolerances and limits shared by every numerical integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Contribution below which a far segment of an infinite range is dropped.
    pub trunc_tail: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 400,
            trunc_tail: 1e-10,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.trunc_tail > 0.0) {
            return Err(QuadratureError::InvalidSpec("tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadratureError::InvalidSpec("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// Settings for an integral nested inside another one.
    pub fn tightened(&self, factor: f64) -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            max_subdivisions: self.max_subdivisions,
            trunc_tail: self.trunc_tail * factor,
        }
    }

    /// Every tolerance divided by two.
    pub fn halved(&self) -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: self.abs_tol / 2.0,
            rel_tol: self.rel_tol / 2.0,
            max_subdivisions: self.max_subdivisions * 2,
            trunc_tail: self.trunc_tail / 2.0,
        }
    }
}

/// An integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
}

impl std::ops::Add for Integral {
    type Output = Integral;
    fn add(self, rhs: Integral) -> Integral {
        Integral {
            value: self.value + rhs.value,
            abs_error: self.abs_error + rhs.abs_error,
        }
    }
}

struct Rule {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (nodes, weights) = gauss_legendre::<ORDER>();
        Rule { nodes, weights }
    })
}

/// Nodes and weights of the `N`-point Gauss–Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
fn gauss_legendre<const N: usize>() -> ([f64; N], [f64; N]) {
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    let n = N as f64;
    for i in 0..N.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut derivative;
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..N {
                let p3 = p2;
                p2 = p1;
                let j = j as f64;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            derivative = n * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / derivative;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        if 2 * i + 1 == N {
            // The middle root of an odd-order rule is exactly zero.
            z = 0.0;
        }
        nodes[i] = -z;
        nodes[N - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * derivative * derivative);
        weights[i] = w;
        weights[N - 1 - i] = w;
    }
    (nodes, weights)
}

fn gauss<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<f64, QuadratureError> {
    let rule = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let at = mid + half * x;
        let v = f(at);
        if !v.is_finite() {
            return Err(QuadratureError::NonFinite { at });
        }
        sum += w * v;
    }
    Ok(sum * half)
}

struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Panel {
    /// `whole` is the single-rule value on `[a, b]`.
    fn new<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, whole: f64) -> Result<Self, QuadratureError> {
        let m = 0.5 * (a + b);
        let left = gauss(f, a, m)?;
        let right = gauss(f, m, b)?;
        let error = (left + right - whole).abs();
        Ok(Panel {
            a,
            b,
            left,
            right,
            error,
        })
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    spec.validate()?;
    if a == b {
        return Ok(Integral::default());
    }
    if b < a {
        let r = integrate(f, b, a, spec)?;
        return Ok(Integral {
            value: -r.value,
            abs_error: r.abs_error,
        });
    }
    let whole = gauss(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel::new(&mut f, a, b, whole)?);
    let mut subdivisions = 0;
    loop {
        let (value, error, magnitude) = heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.value(), acc.1 + p.error, acc.2 + p.value().abs())
        });
        let tolerance = spec
            .abs_tol
            .max(spec.rel_tol * value.abs())
            .max(64.0 * f64::EPSILON * magnitude);
        if error <= tolerance {
            return Ok(Integral {
                value,
                abs_error: error,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(QuadratureError::NotConverged {
                value,
                error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Panel cannot be split further in floating point.
            return Err(QuadratureError::NotConverged {
                value,
                error,
                subdivisions,
            });
        }
        heap.push(Panel::new(&mut f, worst.a, m, worst.left)?);
        heap.push(Panel::new(&mut f, m, worst.b, worst.right)?);
        subdivisions += 1;
    }
}

/// Integrates `f` over `[a, ∞)`. The first segment is `[a, a + first_width]`
/// and each following segment is twice as wide as the previous one; the
/// range ends with the first segment whose contribution is below
/// `spec.trunc_tail`. That last contribution is added to the error estimate
/// as a bound on the omitted tail.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    first_width: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    spec.validate()?;
    if !(first_width > 0.0 && first_width.is_finite()) {
        return Err(QuadratureError::InvalidSpec("first segment width must be positive"));
    }
    let mut total = Integral::default();
    let mut lo = a;
    let mut width = first_width;
    let mut last = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        let hi = lo + width;
        let seg = integrate(&mut f, lo, hi, spec)?;
        total = total + seg;
        last = seg.value.abs();
        if last <= spec.trunc_tail {
            total.abs_error += last;
            return Ok(total);
        }
        lo = hi;
        width *= 2.0;
    }
    Err(QuadratureError::Truncation {
        reached: lo,
        tail_bound: last,
    })
}

/// Integrates `f` over the whole real line, with `[-half, half]` as the
/// central segment and doubling tails on both sides.
pub fn integrate_real_line<F: FnMut(f64) -> f64>(
    mut f: F,
    half: f64,
    tail_width: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    let center = if half > 0.0 {
        integrate(&mut f, -half, half, spec)?
    } else {
        Integral::default()
    };
    let right = integrate_to_infinity(&mut f, half.max(0.0), tail_width, spec)?;
    let left = integrate_to_infinity(|t| f(-t), half.max(0.0), tail_width, spec)?;
    Ok(center + right + left)
}
