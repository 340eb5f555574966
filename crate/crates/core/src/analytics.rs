//! Closed-form statistics of the line-supported Cox process, evaluated
//! numerically.
//!
//! All functions assume isotropic lines (`G(dθ) = dθ/π`) unless noted and
//! return an [`Evaluation`]: the value together with a first-order
//! propagation of the quadrature error estimates.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{line_point, LineParams, Point2};
use crate::quadrature::{
    integrate, integrate_real_line, integrate_to_infinity, Integral, QuadratureError, QuadratureSpec,
};
use crate::sampler::{ModelParams, Orientation};

/// Each nesting level of an iterated integral asks for this much more
/// accuracy than the level around it.
const NESTING_FACTOR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("closed-form analytics are implemented for isotropic lines only")]
    UnsupportedOrientation,
    #[error("{name} out of domain: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// A numerically evaluated quantity and its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub error: f64,
}

/// `1 − e^{−x}` without cancellation for small `x`.
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

fn require_isotropic(params: &ModelParams) -> Result<(), AnalyticsError> {
    match params.orientation {
        Orientation::Isotropic => Ok(()),
        Orientation::Manhattan => Err(AnalyticsError::UnsupportedOrientation),
    }
}

fn require_nonnegative(name: &'static str, value: f64) -> Result<(), AnalyticsError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(AnalyticsError::Domain { name, value })
    }
}

/// Collects failures and error estimates of inner integrals evaluated inside
/// the integrand of an outer one.
#[derive(Default)]
struct Inner {
    failure: Option<AnalyticsError>,
    max_error: f64,
}

impl Inner {
    fn take(&mut self, r: Result<Integral, AnalyticsError>) -> f64 {
        match r {
            Ok(i) => {
                self.max_error = self.max_error.max(i.abs_error);
                i.value
            }
            Err(e) => {
                self.failure.get_or_insert(e);
                // Aborts the enclosing quadrature at once.
                f64::NAN
            }
        }
    }

    fn finish(self, outer: Result<Integral, QuadratureError>) -> Result<(Integral, f64), AnalyticsError> {
        if let Some(e) = self.failure {
            return Err(e);
        }
        Ok((outer?, self.max_error))
    }
}

type RadialFn = dyn Fn(f64) -> f64 + Send + Sync;
type PlanarFn = dyn Fn(Point2) -> f64 + Send + Sync;

/// A nonnegative radially symmetric function `f̃(‖x‖)`.
///
/// `support_radius` is the scale beyond which `f̃` is small and
/// nonincreasing; integrals over infinite ranges start their tail search
/// there.
#[derive(Clone)]
pub struct RadialFunction {
    eval: Arc<RadialFn>,
    support_radius: f64,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("support_radius", &self.support_radius)
            .finish_non_exhaustive()
    }
}

impl RadialFunction {
    /// Wraps `eval`, checking nonnegativity on `[0, 4·support_radius]` and
    /// monotone decay beyond `support_radius` on a sampling grid.
    pub fn new(eval: impl Fn(f64) -> f64 + Send + Sync + 'static, support_radius: f64) -> Result<Self, AnalyticsError> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(AnalyticsError::InvalidFunction(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        const SAMPLES: usize = 256;
        let mut previous = f64::INFINITY;
        for k in 0..=SAMPLES {
            let rho = 4.0 * support_radius * k as f64 / SAMPLES as f64;
            let v = eval(rho);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(AnalyticsError::InvalidFunction(format!(
                    "value {v} at radius {rho} is not a finite nonnegative number"
                )));
            }
            if rho >= support_radius {
                if v > previous * (1.0 + 1e-12) {
                    return Err(AnalyticsError::InvalidFunction(format!(
                        "increases beyond the support radius (at {rho})"
                    )));
                }
                previous = v;
            }
        }
        Ok(RadialFunction {
            eval: Arc::new(eval),
            support_radius,
        })
    }

    pub fn zero() -> Self {
        RadialFunction {
            eval: Arc::new(|_| 0.0),
            support_radius: 1.0,
        }
    }

    /// `e^{−ρ²}`.
    pub fn gaussian() -> Self {
        RadialFunction {
            eval: Arc::new(|rho: f64| (-rho * rho).exp()),
            support_radius: 12f64.mul_add(std::f64::consts::LN_10, 0.0).sqrt(),
        }
    }

    /// Path loss `scale · max(ρ, exclusion)^{−alpha}`, capped inside the
    /// exclusion radius.
    pub fn path_loss(scale: f64, alpha: f64, exclusion: f64) -> Result<Self, AnalyticsError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(AnalyticsError::Domain {
                name: "scale",
                value: scale,
            });
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(AnalyticsError::Domain {
                name: "alpha",
                value: alpha,
            });
        }
        if !(exclusion > 0.0 && exclusion.is_finite()) {
            return Err(AnalyticsError::Domain {
                name: "exclusion",
                value: exclusion,
            });
        }
        let support = 4.0 * exclusion.max(scale.powf(1.0 / alpha));
        Ok(RadialFunction {
            eval: Arc::new(move |rho: f64| scale * rho.max(exclusion).powf(-alpha)),
            support_radius: support,
        })
    }

    /// `height` on the open ball of radius `radius`, zero outside.
    pub fn hard_wall(height: f64, radius: f64) -> Result<Self, AnalyticsError> {
        require_nonnegative("height", height)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(AnalyticsError::Domain {
                name: "radius",
                value: radius,
            });
        }
        Ok(RadialFunction {
            eval: Arc::new(move |rho: f64| if rho < radius { height } else { 0.0 }),
            support_radius: radius,
        })
    }

    /// `factor · f̃`.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = Arc::clone(&self.eval);
        RadialFunction {
            eval: Arc::new(move |rho| factor * inner(rho)),
            support_radius: self.support_radius,
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        (self.eval)(rho)
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }
}

/// A nonnegative function on the plane, negligible outside `support_radius`.
#[derive(Clone)]
pub struct PlanarFunction {
    eval: Arc<PlanarFn>,
    support_radius: f64,
}

impl fmt::Debug for PlanarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlanarFunction")
            .field("support_radius", &self.support_radius)
            .finish_non_exhaustive()
    }
}

impl PlanarFunction {
    /// Wraps `eval`, checking nonnegativity on a polar grid of radius
    /// `2·support_radius`.
    pub fn new(
        eval: impl Fn(Point2) -> f64 + Send + Sync + 'static,
        support_radius: f64,
    ) -> Result<Self, AnalyticsError> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(AnalyticsError::InvalidFunction(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        for i in 0..=64 {
            let rho = 2.0 * support_radius * i as f64 / 64.0;
            for j in 0..32 {
                let p = Point2::new(rho, 0.0).rotated(2.0 * PI * j as f64 / 32.0);
                let v = eval(p);
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(AnalyticsError::InvalidFunction(format!(
                        "value {v} at {p:?} is not a finite nonnegative number"
                    )));
                }
            }
        }
        Ok(PlanarFunction {
            eval: Arc::new(eval),
            support_radius,
        })
    }

    pub fn zero() -> Self {
        PlanarFunction {
            eval: Arc::new(|_| 0.0),
            support_radius: 1.0,
        }
    }

    pub fn from_radial(f: &RadialFunction) -> Self {
        let inner = Arc::clone(&f.eval);
        PlanarFunction {
            eval: Arc::new(move |p: Point2| inner(p.norm())),
            support_radius: f.support_radius,
        }
    }

    /// `e^{−‖x − center‖²}`; not radially symmetric unless `center` is the
    /// origin.
    pub fn gaussian_bump(center: Point2) -> Self {
        let g = RadialFunction::gaussian();
        PlanarFunction {
            eval: Arc::new(move |p: Point2| (-(p - center).norm_squared()).exp()),
            support_radius: center.norm() + g.support_radius,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let inner = Arc::clone(&self.eval);
        PlanarFunction {
            eval: Arc::new(move |p| factor * inner(p)),
            support_radius: self.support_radius,
        }
    }

    pub fn eval(&self, p: Point2) -> f64 {
        (self.eval)(p)
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }
}

/// `∫₀^r (1 − e^{−2μ√(r²−u²)}) du` multiplied by `2λ_l`, computed with
/// `u = r sin φ` so the integrand is smooth on `[0, π/2]`.
fn void_exponent(r: f64, params: &ModelParams, quad: &QuadratureSpec) -> Result<Integral, AnalyticsError> {
    if r == 0.0 {
        return Ok(Integral::default());
    }
    let mu = params.mu;
    let i = integrate(
        |phi: f64| {
            let chord = r * phi.cos();
            chord * one_minus_exp_neg(2.0 * mu * chord)
        },
        0.0,
        FRAC_PI_2,
        quad,
    )?;
    let k = 2.0 * params.lambda_l;
    Ok(Integral {
        value: k * i.value,
        abs_error: k * i.abs_error,
    })
}

fn cdf_from_exponent(exponent: Integral) -> Evaluation {
    let survival = (-exponent.value).exp();
    Evaluation {
        value: one_minus_exp_neg(exponent.value),
        error: survival * exponent.abs_error,
    }
}

/// Distribution function of the distance from a fixed location to the
/// nearest point: `1 − exp(−2λ_l ∫₀^r (1 − e^{−2μ√(r²−u²)}) du)`.
pub fn nn_cdf(r: f64, params: &ModelParams, quad: &QuadratureSpec) -> Result<Evaluation, AnalyticsError> {
    require_isotropic(params)?;
    require_nonnegative("r", r)?;
    Ok(cdf_from_exponent(void_exponent(r, params, quad)?))
}

/// Distribution function of the distance from the typical point to its
/// nearest neighbour: the void exponent plus `2μr` for the typical line.
pub fn nn_cdf_palm(r: f64, params: &ModelParams, quad: &QuadratureSpec) -> Result<Evaluation, AnalyticsError> {
    require_isotropic(params)?;
    require_nonnegative("r", r)?;
    let mut e = void_exponent(r, params, quad)?;
    e.value += 2.0 * params.mu * r;
    Ok(cdf_from_exponent(e))
}

/// `∫_ℝ (1 − e^{−f(x(t))}) dt` along the line `(r, θ)`.
fn line_mass(f: &PlanarFunction, r: f64, theta: f64, quad: &QuadratureSpec) -> Result<Integral, AnalyticsError> {
    let s = f.support_radius;
    let line = LineParams::new(r, theta).map_err(|e| AnalyticsError::InvalidFunction(e.to_string()))?;
    let half = if r.abs() < s { ((s - r) * (s + r)).sqrt() } else { 0.0 };
    // A distant line sees a small integrand spread over a length ~|r|, so
    // the tail search must not start finer than that.
    Ok(integrate_real_line(
        |t| one_minus_exp_neg(f.eval(line_point(&line, t))),
        half,
        s.max(r.abs()),
        quad,
    )?)
}

/// `∫₀^∞ (1 − e^{−f̃(√(t² + r²))}) dt`.
fn radial_half_line_mass(f: &RadialFunction, r: f64, quad: &QuadratureSpec) -> Result<Integral, AnalyticsError> {
    let s = f.support_radius;
    let g = |t: f64| one_minus_exp_neg(f.eval(t.hypot(r)));
    if r < s {
        let half = ((s - r) * (s + r)).sqrt();
        let core = if half > 0.0 {
            integrate(g, 0.0, half, quad)?
        } else {
            Integral::default()
        };
        Ok(core + integrate_to_infinity(g, half, s, quad)?)
    } else {
        Ok(integrate_to_infinity(g, 0.0, r, quad)?)
    }
}

fn laplace_from_exponent(exponent: Integral) -> Evaluation {
    let value = (-exponent.value).exp();
    Evaluation {
        value,
        error: value * exponent.abs_error,
    }
}

/// Laplace functional `E[exp(−Σ f(X))]` of the stationary process.
///
/// The exponent is `(λ_l/π) ∫_ℝ ∫₀^π [1 − exp(−μ ∫_ℝ (1 − e^{−f}) dt)] dθ dr`
/// over all lines `(r, θ)`, with the line integral taken along the whole
/// line.
pub fn laplace_functional(
    f: &PlanarFunction,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<Evaluation, AnalyticsError> {
    require_isotropic(params)?;
    quad.validate()?;
    let mid = quad.tightened(NESTING_FACTOR);
    let innermost = mid.tightened(NESTING_FACTOR);
    let mu = params.mu;

    let mut inner = Inner::default();
    let outer = integrate_to_infinity(
        |r: f64| {
            let angular = integrate(
                |theta: f64| {
                    let plus = inner.take(line_mass(f, r, theta, &innermost));
                    let minus = inner.take(line_mass(f, -r, theta, &innermost));
                    one_minus_exp_neg(mu * plus) + one_minus_exp_neg(mu * minus)
                },
                0.0,
                PI,
                &mid,
            );
            match angular {
                Ok(i) => inner.take(Ok(i)),
                Err(e) => inner.take(Err(e.into())),
            }
        },
        0.0,
        f.support_radius,
        quad,
    );
    let (outer, inner_error) = inner.finish(outer)?;
    let k = params.lambda_l / PI;
    let reach = 4.0 * f.support_radius;
    let exponent = Integral {
        value: k * outer.value,
        abs_error: k * (outer.abs_error + reach * inner_error * (1.0 + 2.0 * PI * mu)),
    };
    Ok(laplace_from_exponent(exponent))
}

/// Laplace functional of a radially symmetric `f̃`:
/// `exp(−2λ_l ∫₀^∞ [1 − exp(−2μ ∫₀^∞ (1 − e^{−f̃(√(t²+r²))}) dt)] dr)`.
pub fn laplace_functional_radial(
    f: &RadialFunction,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<Evaluation, AnalyticsError> {
    require_isotropic(params)?;
    quad.validate()?;
    let inner_spec = quad.tightened(NESTING_FACTOR);
    let mu = params.mu;
    let mut inner = Inner::default();
    let outer = integrate_to_infinity(
        |r: f64| one_minus_exp_neg(2.0 * mu * inner.take(radial_half_line_mass(f, r, &inner_spec))),
        0.0,
        f.support_radius,
        quad,
    );
    let (outer, inner_error) = inner.finish(outer)?;
    let k = 2.0 * params.lambda_l;
    let reach = 4.0 * f.support_radius;
    let exponent = Integral {
        value: k * outer.value,
        abs_error: k * (outer.abs_error + reach * 2.0 * mu * inner_error),
    };
    Ok(laplace_from_exponent(exponent))
}

/// Contribution of the typical line through the origin:
/// `(1/π) ∫₀^π exp(−μ ∫_ℝ (1 − e^{−f(t cos θ, t sin θ)}) dt) dθ`.
pub fn typical_line_factor(
    f: &PlanarFunction,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<Evaluation, AnalyticsError> {
    require_isotropic(params)?;
    quad.validate()?;
    let inner_spec = quad.tightened(NESTING_FACTOR);
    let mu = params.mu;
    let mut inner = Inner::default();
    let outer = integrate(
        |theta: f64| (-mu * inner.take(line_mass(f, 0.0, theta, &inner_spec))).exp(),
        0.0,
        PI,
        quad,
    );
    let (outer, inner_error) = inner.finish(outer)?;
    Ok(Evaluation {
        value: outer.value / PI,
        error: outer.abs_error / PI + mu * inner_error,
    })
}

/// Typical-line contribution for a radial `f̃`: `exp(−μ ∫_ℝ (1 − e^{−f̃(|t|)}) dt)`.
pub fn typical_line_factor_radial(
    f: &RadialFunction,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<Evaluation, AnalyticsError> {
    require_isotropic(params)?;
    quad.validate()?;
    let mass = radial_half_line_mass(f, 0.0, quad)?;
    let value = (-2.0 * params.mu * mass.value).exp();
    Ok(Evaluation {
        value,
        error: value * 2.0 * params.mu * mass.abs_error,
    })
}

fn product(a: Evaluation, b: Evaluation) -> Evaluation {
    Evaluation {
        value: a.value * b.value,
        error: a.error * b.value.abs() + b.error * a.value.abs(),
    }
}

/// Reduced Palm Laplace functional: the typical point at the origin is not
/// part of the sum, the other points of the typical line are.
pub fn laplace_palm(
    f: &PlanarFunction,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<Evaluation, AnalyticsError> {
    let stationary = laplace_functional(f, params, quad)?;
    let typical = typical_line_factor(f, params, quad)?;
    Ok(product(stationary, typical))
}

/// Reduced Palm Laplace functional of a radial `f̃` through the radial
/// evaluator and the closed typical-line factor.
pub fn laplace_palm_radial(
    f: &RadialFunction,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<Evaluation, AnalyticsError> {
    let stationary = laplace_functional_radial(f, params, quad)?;
    let typical = typical_line_factor_radial(f, params, quad)?;
    Ok(product(stationary, typical))
}

/// Palm Laplace functional with the typical point included in the sum:
/// the reduced value times `e^{−f(0)}`.
pub fn laplace_palm_with_atom(
    f: &PlanarFunction,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<Evaluation, AnalyticsError> {
    let reduced = laplace_palm(f, params, quad)?;
    let atom = (-f.eval(Point2::ORIGIN)).exp();
    Ok(Evaluation {
        value: reduced.value * atom,
        error: reduced.error * atom,
    })
}

/// Densities of the vertices, edges and cells of the Voronoi tessellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacetDensities {
    pub vertices: f64,
    pub edges: f64,
    pub cells: f64,
}

impl FacetDensities {
    /// `vertices − edges + cells`; zero for a planar tessellation.
    pub fn euler(&self) -> f64 {
        self.vertices - self.edges + self.cells
    }
}

pub fn facet_densities(params: &ModelParams) -> FacetDensities {
    let cells = point_density(params);
    FacetDensities {
        vertices: 2.0 * cells,
        edges: 3.0 * cells,
        cells,
    }
}

/// Mean number of points per unit area, `μ·λ_l`.
pub fn point_density(params: &ModelParams) -> f64 {
    params.mu * params.lambda_l
}

/// Distribution function of one half of the limiting typical cell,
/// `Exp(2λ_l)`.
pub fn cell_half_length_cdf(l: f64, lambda_l: f64) -> f64 {
    if l <= 0.0 {
        return 0.0;
    }
    one_minus_exp_neg(2.0 * lambda_l * l)
}

/// Distribution function of the length of the limiting typical cell,
/// `Erlang(2, 2λ_l)`: `1 − e^{−2λ_l l}(1 + 2λ_l l)`.
pub fn cell_length_cdf(l: f64, lambda_l: f64) -> f64 {
    if l <= 0.0 {
        return 0.0;
    }
    let x = 2.0 * lambda_l * l;
    // 1 − e^{−x}(1 + x) = (1 − e^{−x}) − x e^{−x}, accurate for small x.
    one_minus_exp_neg(x) - x * (-x).exp()
}

/// Rate of change in `a` of the line measure `m(a, b)` hitting either of the
/// disks of radius `a` and `b` tangent to the typical line at the origin, on
/// opposite sides, in units where `λ_l = π`.
fn tangent_disks_slope(a: f64, b: f64) -> f64 {
    let k = (b - a) / (a + b);
    // Lines with sin θ > k meet disk `a` first; those with sin θ < −k pass
    // on its far side.
    let first = if k < 0.0 {
        PI + 2.0
    } else {
        PI - 2.0 * k.asin() + 2.0 * (1.0 - k * k).sqrt()
    };
    let second = if k >= 0.0 {
        0.0
    } else {
        2.0 * (-k).asin() - 2.0 + 2.0 * (1.0 - k * k).sqrt()
    };
    first + second
}

/// `m(a, b)`, which is positively homogeneous of degree one.
fn tangent_disks_measure(a: f64, b: f64) -> f64 {
    a * tangent_disks_slope(a, b) + b * tangent_disks_slope(b, a)
}

/// Distribution function of the length of the limiting typical cell without
/// assuming its two halves are independent.
///
/// The halves are the radii of the largest line-free disks tangent to the
/// typical line at the origin on either side. A line can meet both disks, so
/// the halves are positively correlated and the sum is not `Erlang(2, 2λ_l)`,
/// although each half is `Exp(2λ_l)`.
pub fn cell_length_cdf_exact(l: f64, lambda_l: f64, quad: &QuadratureSpec) -> Result<Evaluation, AnalyticsError> {
    require_nonnegative("l", l)?;
    require_nonnegative("lambda_l", lambda_l)?;
    let x = lambda_l * l;
    if x == 0.0 {
        return Ok(Evaluation { value: 0.0, error: 0.0 });
    }
    // P(S > x) = e^{−2x} + ∫₀^x P(S₋ > x − a, S₊ ∈ da).
    let joint = |a: f64| {
        let b = x - a;
        if a + b == 0.0 {
            return 0.0;
        }
        tangent_disks_slope(a, b) / PI * (-tangent_disks_measure(a, b) / PI).exp()
    };
    let left = integrate(joint, 0.0, 0.5 * x, quad)?;
    let right = integrate(joint, 0.5 * x, x, quad)?;
    Ok(Evaluation {
        value: one_minus_exp_neg(2.0 * x) - left.value - right.value,
        error: left.abs_error + right.abs_error,
    })
}

/// Evenly spaced abscissae `min, …, max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl CurveGrid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self, AnalyticsError> {
        if !(min.is_finite() && max.is_finite() && max >= min) {
            return Err(AnalyticsError::Domain {
                name: "grid_max",
                value: max,
            });
        }
        if count == 0 {
            return Err(AnalyticsError::Domain {
                name: "grid_count",
                value: 0.0,
            });
        }
        Ok(CurveGrid { min, max, count })
    }

    pub fn abscissae(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + step * i as f64
                }
            })
            .collect()
    }
}

/// `(x, f(x))` for every abscissa of `grid`.
pub fn tabulate<E>(grid: &CurveGrid, mut f: impl FnMut(f64) -> Result<f64, E>) -> Result<Vec<(f64, f64)>, E> {
    grid.abscissae().into_iter().map(|x| Ok((x, f(x)?))).collect()
}
