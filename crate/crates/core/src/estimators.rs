//! Monte Carlo counterparts of the analytic quantities and the
//! goodness-of-fit tools used to compare them.
//!
//! Replications run in parallel; results are collected in replication order
//! and reduced sequentially, so every estimate is bit-stable for a seed.

use std::f64::consts::PI;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::PlanarFunction;
use crate::geometry::Point2;
use crate::quadrature::{integrate, integrate_to_infinity, QuadratureSpec};
use crate::sampler::{
    default_buffer, sample_palm, sample_palm_coupled, sample_stationary, ModelParams, Realization, SampleError,
    SeedSpec,
};
use crate::tessellation::{build_voronoi, typical_cell_extent, CellExtent, Tessellation, TessellationError};

/// Each doubling of the window in nested searches; far more than any
/// realistic configuration needs.
const MAX_DOUBLINGS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("{name} out of domain: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Tessellation(#[from] TessellationError),
    #[error("no point found within radius {0}")]
    NoPoint(f64),
}

/// Empirical distribution function of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    values: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self, EstimatorError> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(EstimatorError::NonFinite);
        }
        values.sort_by(f64::total_cmp);
        Ok(Ecdf { values })
    }

    /// `#{values ≤ x} / n`; zero for an empty sample.
    pub fn eval(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// Left limit `#{values < x} / n`.
    pub fn eval_left(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.partition_point(|&v| v < x) as f64 / self.values.len() as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted sample.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Kolmogorov–Smirnov distance `sup |F_n − F|`, using both one-sided limits
/// of the ECDF at every sample point. `cdf` should be continuous there.
pub fn ks_distance(ecdf: &Ecdf, cdf: impl Fn(f64) -> f64) -> f64 {
    let n = ecdf.len() as f64;
    let v = ecdf.values();
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        // Ties form one jump.
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let f = cdf(v[i]);
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

/// Dvoretzky–Kiefer–Wolfowitz half-width: `P(sup |F_n − F| > ε) ≤ alpha`
/// for `ε = √(ln(2/alpha) / (2n))`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Acceptance threshold for a KS distance against an analytic curve:
/// twice the 99% DKW half-width, the factor covering quadrature error.
pub fn ks_threshold(n: usize) -> f64 {
    2.0 * dkw_epsilon(n, 0.01)
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleKs {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_two_sample(a: &Ecdf, b: &Ecdf) -> TwoSampleKs {
    let (x, y) = (a.values(), b.values());
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    // Small-sample correction of the asymptotic distribution.
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    TwoSampleKs {
        statistic: d,
        p_value: kolmogorov_q(lambda),
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub master_seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_samples(samples: &[f64], master_seed: u64) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let ss: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        MonteCarloEstimate {
            mean,
            stderr,
            n,
            master_seed,
        }
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

fn require_samples(n: usize) -> Result<(), EstimatorError> {
    if n == 0 {
        return Err(EstimatorError::Domain { name: "n", value: 0.0 });
    }
    Ok(())
}

/// Runs `job` for replications `0..n` in parallel, keeping index order.
fn replicate<T: Send>(
    n: usize,
    job: impl Fn(u64) -> Result<T, EstimatorError> + Sync + Send,
) -> Result<Vec<T>, EstimatorError> {
    (0..n as u64).into_par_iter().map(job).collect()
}

/// Distance from the origin to the nearest non-atom point, growing the
/// window by doubling until a point is found inside it. The windows are
/// nested restrictions of one sample, so the search does not bias the
/// result.
fn nearest_distance(
    params: &ModelParams,
    start_radius: f64,
    seed: SeedSpec,
    palm: bool,
) -> Result<f64, EstimatorError> {
    let mut radius = start_radius;
    for _ in 0..MAX_DOUBLINGS {
        let real = if palm {
            sample_palm(params, radius, 0.0, seed)?
        } else {
            sample_stationary(params, radius, 0.0, seed)?
        };
        if let Some(d) = real.nearest_distance_from_origin().filter(|&d| d <= radius) {
            return Ok(d);
        }
        radius *= 2.0;
    }
    Err(EstimatorError::NoPoint(radius))
}

/// Nearest-point distances from the origin over `n` stationary realizations.
/// `obs_radius` is the first search window.
pub fn empirical_nn_cdf(params: &ModelParams, obs_radius: f64, n: usize, seed: u64) -> Result<Ecdf, EstimatorError> {
    require_samples(n)?;
    let d = replicate(n, |i| {
        nearest_distance(params, obs_radius, SeedSpec::new(seed, i), false)
    })?;
    Ecdf::new(d)
}

/// Distances from the typical point to its nearest neighbour over `n` Palm
/// realizations.
pub fn empirical_nn_cdf_palm(
    params: &ModelParams,
    obs_radius: f64,
    n: usize,
    seed: u64,
) -> Result<Ecdf, EstimatorError> {
    require_samples(n)?;
    let d = replicate(n, |i| {
        nearest_distance(params, obs_radius, SeedSpec::new(seed, i), true)
    })?;
    Ecdf::new(d)
}

/// `μ λ_l ∫_{‖x‖ > radius} f(x) dx`, which bounds the bias from dropping the
/// points outside the window; `None` when the integral does not converge.
pub fn truncation_bound(f: &PlanarFunction, params: &ModelParams, radius: f64) -> Option<f64> {
    let quad = QuadratureSpec {
        abs_tol: 1e-12,
        rel_tol: 1e-6,
        ..QuadratureSpec::default()
    };
    let ring = |rho: f64| {
        integrate(
            |phi: f64| f.eval(Point2::new(rho, 0.0).rotated(phi)),
            0.0,
            2.0 * PI,
            &quad,
        )
        .map(|i| rho * i.value)
        .unwrap_or(f64::NAN)
    };
    let tail = integrate_to_infinity(ring, radius, radius.max(f.support_radius()), &quad).ok()?;
    Some(params.mu * params.lambda_l * tail.value)
}

fn warn_truncation(f: &PlanarFunction, params: &ModelParams, obs_radius: f64) {
    if f.support_radius() > obs_radius {
        match truncation_bound(f, params, obs_radius) {
            Some(b) => warn!(
                "function support {} exceeds the window {obs_radius}; truncation bias at most {b:.3e}",
                f.support_radius()
            ),
            None => warn!(
                "function support {} exceeds the window {obs_radius} and its tail is not integrable",
                f.support_radius()
            ),
        }
    }
}

fn laplace_term(real: &Realization, f: &PlanarFunction, skip_atom: bool) -> f64 {
    let skip = usize::from(skip_atom);
    let sum: f64 = real.points[skip.min(real.points.len())..]
        .iter()
        .map(|p| f.eval(p.position))
        .sum();
    (-sum).exp()
}

/// Mean of `exp(−Σ f(X))` over `n` stationary realizations in the disk of
/// radius `obs_radius`.
pub fn empirical_laplace(
    f: &PlanarFunction,
    params: &ModelParams,
    obs_radius: f64,
    n: usize,
    seed: u64,
) -> Result<MonteCarloEstimate, EstimatorError> {
    require_samples(n)?;
    warn_truncation(f, params, obs_radius);
    let terms = replicate(n, |i| {
        let real = sample_stationary(params, obs_radius, 0.0, SeedSpec::new(seed, i))?;
        Ok(laplace_term(&real, f, false))
    })?;
    Ok(MonteCarloEstimate::from_samples(&terms, seed))
}

/// Reduced Palm counterpart of [`empirical_laplace`]: the typical point is
/// left out of the sum, the rest of its line is not.
pub fn empirical_laplace_palm(
    f: &PlanarFunction,
    params: &ModelParams,
    obs_radius: f64,
    n: usize,
    seed: u64,
) -> Result<MonteCarloEstimate, EstimatorError> {
    require_samples(n)?;
    warn_truncation(f, params, obs_radius);
    let terms = replicate(n, |i| {
        let real = sample_palm(params, obs_radius, 0.0, SeedSpec::new(seed, i))?;
        Ok(laplace_term(&real, f, true))
    })?;
    Ok(MonteCarloEstimate::from_samples(&terms, seed))
}

/// Per-area facet densities with minus sampling, and their Euler
/// combination `vertices − edges + cells`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacetEstimates {
    pub vertices: MonteCarloEstimate,
    pub edges: MonteCarloEstimate,
    pub cells: MonteCarloEstimate,
    pub euler: MonteCarloEstimate,
    pub counting_radius: f64,
}

/// Facet densities over `n` realizations observed in `obs_radius`. Points
/// are simulated in a buffered window so that facets inside the counting
/// disk are exact.
pub fn empirical_facet_densities(
    params: &ModelParams,
    obs_radius: f64,
    n: usize,
    seed: u64,
) -> Result<FacetEstimates, EstimatorError> {
    require_samples(n)?;
    let counting_radius = Tessellation::default_counting_radius(obs_radius, params);
    if counting_radius.is_nan() || counting_radius <= 0.0 {
        return Err(EstimatorError::Domain {
            name: "counting_radius",
            value: counting_radius,
        });
    }
    let buffer = default_buffer(params, 0.0);
    let area = PI * counting_radius * counting_radius;
    let per_rep = replicate(n, |i| {
        let real = sample_stationary(params, obs_radius, buffer, SeedSpec::new(seed, i))?;
        if real.points.is_empty() {
            return Ok([0.0; 3]);
        }
        let c = build_voronoi(&real)?.facet_counts(counting_radius)?.counts;
        Ok([
            c.n_vertices as f64 / area,
            c.n_edges as f64 / area,
            c.n_cells as f64 / area,
        ])
    })?;
    let column = |k: usize| per_rep.iter().map(|r| r[k]).collect::<Vec<_>>();
    let euler: Vec<f64> = per_rep.iter().map(|r| r[0] - r[1] + r[2]).collect();
    Ok(FacetEstimates {
        vertices: MonteCarloEstimate::from_samples(&column(0), seed),
        edges: MonteCarloEstimate::from_samples(&column(1), seed),
        cells: MonteCarloEstimate::from_samples(&column(2), seed),
        euler: MonteCarloEstimate::from_samples(&euler, seed),
        counting_radius,
    })
}

/// Points per unit area in the disk of radius `obs_radius`, over `n`
/// realizations.
pub fn empirical_intensity(
    params: &ModelParams,
    obs_radius: f64,
    n: usize,
    seed: u64,
) -> Result<MonteCarloEstimate, EstimatorError> {
    require_samples(n)?;
    let area = PI * obs_radius * obs_radius;
    let per_rep = replicate(n, |i| {
        let real = sample_stationary(params, obs_radius, 0.0, SeedSpec::new(seed, i))?;
        Ok(real.points.len() as f64 / area)
    })?;
    Ok(MonteCarloEstimate::from_samples(&per_rep, seed))
}

/// Counts in `B(0, radius)` and `B(shift, radius)` from disjoint replication
/// ranges, `n` each, compared by a two-sample KS test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityCheck {
    pub at_origin: Ecdf,
    pub shifted: Ecdf,
    pub test: TwoSampleKs,
}

pub fn stationarity_check(
    params: &ModelParams,
    shift: Point2,
    radius: f64,
    n: usize,
    seed: u64,
) -> Result<StationarityCheck, EstimatorError> {
    require_samples(n)?;
    let window = shift.norm() + radius;
    let count = |i: u64, center: Point2| -> Result<f64, EstimatorError> {
        let real = sample_stationary(params, window, 0.0, SeedSpec::new(seed, i))?;
        Ok(real.count_in_ball(center, radius) as f64)
    };
    let at_origin = replicate(n, |i| count(i, Point2::ORIGIN))?;
    let shifted = replicate(n, |i| count(n as u64 + i, shift))?;
    let at_origin = Ecdf::new(at_origin)?;
    let shifted = Ecdf::new(shifted)?;
    let test = ks_two_sample(&at_origin, &shifted);
    Ok(StationarityCheck {
        at_origin,
        shifted,
        test,
    })
}

/// Typical cell of one Palm replication, enlarging the window by doubling
/// up to `max_retries` times. Returns the extent and the retries used.
pub fn typical_cell_with_retries(
    params: &ModelParams,
    start_radius: f64,
    max_retries: u32,
    seed: SeedSpec,
) -> Result<(CellExtent, u32), EstimatorError> {
    let mut radius = start_radius;
    let mut retries = 0;
    loop {
        let real = sample_palm(params, radius, 0.0, seed)?;
        match typical_cell_extent(&real) {
            Ok(ext) => return Ok((ext, retries)),
            Err(TessellationError::InsufficientWindow { .. }) if retries < max_retries => {
                retries += 1;
                radius *= 2.0;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Start window for typical-cell experiments: a few mean line spacings.
pub fn cell_start_radius(params: &ModelParams) -> f64 {
    4.0 / params.lambda_l
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLaw {
    /// `s_plus + s_minus` per replication.
    pub length: Ecdf,
    pub s_plus: Ecdf,
    pub width: MonteCarloEstimate,
    pub mean_length: MonteCarloEstimate,
    /// Window doublings used across all replications.
    pub retries: u64,
}

/// Typical-cell statistics over `n` Palm realizations.
pub fn empirical_cell_law(
    params: &ModelParams,
    n: usize,
    max_retries: u32,
    seed: u64,
) -> Result<CellLaw, EstimatorError> {
    require_samples(n)?;
    let start = cell_start_radius(params);
    let cells = replicate(n, |i| {
        typical_cell_with_retries(params, start, max_retries, SeedSpec::new(seed, i))
    })?;
    let lengths: Vec<f64> = cells.iter().map(|(e, _)| e.length()).collect();
    let widths: Vec<f64> = cells.iter().map(|(e, _)| e.width).collect();
    Ok(CellLaw {
        mean_length: MonteCarloEstimate::from_samples(&lengths, seed),
        width: MonteCarloEstimate::from_samples(&widths, seed),
        length: Ecdf::new(lengths)?,
        s_plus: Ecdf::new(cells.iter().map(|(e, _)| e.s_plus).collect())?,
        retries: cells.iter().map(|&(_, r)| u64::from(r)).sum(),
    })
}

/// Mean typical-cell width at each intensity of `mus` (increasing), all
/// levels sharing lines and points through the densification coupling.
pub fn width_sweep(
    params: &ModelParams,
    mus: &[f64],
    n: usize,
    max_retries: u32,
    seed: u64,
) -> Result<Vec<MonteCarloEstimate>, EstimatorError> {
    require_samples(n)?;
    if mus.is_empty() {
        return Ok(Vec::new());
    }
    let start = cell_start_radius(params);
    let per_rep = replicate(n, |i| {
        let mut radius = start;
        let mut retries = 0;
        loop {
            let levels = sample_palm_coupled(params, mus, radius, 0.0, SeedSpec::new(seed, i))?;
            let widths: Result<Vec<f64>, TessellationError> =
                levels.iter().map(|r| typical_cell_extent(r).map(|e| e.width)).collect();
            match widths {
                Ok(w) => return Ok(w),
                Err(TessellationError::InsufficientWindow { .. }) if retries < max_retries => {
                    retries += 1;
                    radius *= 2.0;
                }
                Err(e) => return Err(e.into()),
            }
        }
    })?;
    Ok((0..mus.len())
        .map(|k| {
            let col: Vec<f64> = per_rep.iter().map(|w| w[k]).collect();
            MonteCarloEstimate::from_samples(&col, seed)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{cell_half_length_cdf, nn_cdf, RadialFunction};

    fn unit() -> ModelParams {
        ModelParams::isotropic(1.0, 1.0).unwrap()
    }

    #[test]
    fn ecdf_basics() {
        let e = Ecdf::new(vec![3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(e.values(), &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval_left(2.0), 0.25);
        assert_eq!(e.eval(3.0), 1.0);
        assert!(Ecdf::new(vec![f64::NAN]).is_err());
        assert_eq!(Ecdf::new(vec![]).unwrap().eval(1.0), 0.0);
    }

    #[test]
    fn ks_examples() {
        // Sample on the grid of its own CDF.
        let n = 1000;
        let grid: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let e = Ecdf::new(grid).unwrap();
        assert!(ks_distance(&e, |x| x.clamp(0.0, 1.0)) <= 1.0 / n as f64 + 1e-15);
        assert_eq!(ks_distance(&e, |_| 0.0), 1.0);
        let single = Ecdf::new(vec![0.5]).unwrap();
        assert_eq!(ks_distance(&single, |x| x), 0.5);
    }

    #[test]
    fn dkw_values() {
        assert!((dkw_epsilon(100_000, 0.01) - 0.005_146_7).abs() < 1e-6);
        assert!((ks_threshold(100_000) - 0.010_293).abs() < 1e-5);
        assert!(ks_threshold(1000) > ks_threshold(100_000));
    }

    #[test]
    fn uniform_sample_is_within_dkw() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let e = Ecdf::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap();
        assert!(ks_distance(&e, |x| x.clamp(0.0, 1.0)) < dkw_epsilon(n, 0.01));
    }

    #[test]
    fn two_sample_ks() {
        let a = Ecdf::new((0..500).map(|i| i as f64).collect()).unwrap();
        let b = Ecdf::new((0..500).map(|i| i as f64 + 0.5).collect()).unwrap();
        let t = ks_two_sample(&a, &b);
        assert!(t.statistic <= 0.0021 && t.p_value > 0.99);
        let c = Ecdf::new((0..500).map(|i| i as f64 + 250.0).collect()).unwrap();
        let t = ks_two_sample(&a, &c);
        assert!((t.statistic - 0.5).abs() < 1e-12 && t.p_value < 1e-10);
        // Q(1.36) is the classical 5% point.
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn estimate_arithmetic() {
        let e = MonteCarloEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0], 7);
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(MonteCarloEstimate::from_samples(&[3.0], 1).stderr, 0.0);
        assert!(e.within(2.0, 1.0) && !e.within(0.0, 1.0));
    }

    #[test]
    fn seeds_reproduce() {
        let p = unit();
        let a = empirical_nn_cdf(&p, 1.0, 200, 5).unwrap();
        let b = empirical_nn_cdf(&p, 1.0, 200, 5).unwrap();
        assert_eq!(a, b);
        // The search window does not change the sample.
        let c = empirical_nn_cdf(&p, 0.1, 200, 5).unwrap();
        assert_eq!(a, c);
        let a = empirical_nn_cdf_palm(&p, 1.0, 200, 5).unwrap();
        assert_eq!(a, empirical_nn_cdf_palm(&p, 1.0, 200, 5).unwrap());
    }

    #[test]
    fn small_nn_sample_is_plausible() {
        let p = unit();
        let e = empirical_nn_cdf(&p, 1.0, 4000, 12).unwrap();
        let q = QuadratureSpec::default();
        let d = ks_distance(&e, |r| nn_cdf(r, &p, &q).unwrap().value);
        assert!(d < dkw_epsilon(4000, 0.001), "{d}");
    }

    #[test]
    fn laplace_of_zero_and_monotonicity() {
        let p = unit();
        let zero = empirical_laplace(&PlanarFunction::zero(), &p, 3.0, 50, 1).unwrap();
        assert_eq!((zero.mean, zero.stderr), (1.0, 0.0));
        let f = PlanarFunction::from_radial(&RadialFunction::gaussian());
        let one = empirical_laplace(&f, &p, 6.0, 300, 2).unwrap();
        let two = empirical_laplace(&f.scaled(2.0), &p, 6.0, 300, 2).unwrap();
        assert!(two.mean <= one.mean && one.mean <= 1.0 && two.mean > 0.0);
        let palm = empirical_laplace_palm(&f, &p, 6.0, 300, 2).unwrap();
        assert!(palm.mean <= one.mean);
    }

    #[test]
    fn truncation_bound_of_path_loss() {
        let f = PlanarFunction::from_radial(&RadialFunction::path_loss(1.0, 4.0, 0.1).unwrap());
        // μλ · 2π ∫_R^∞ ρ^{-3} dρ = π / R².
        let b = truncation_bound(&f, &unit(), 10.0).unwrap();
        assert!((b - PI / 100.0).abs() < 1e-6, "{b}");
    }

    #[test]
    fn facet_estimates_small_run() {
        let est = empirical_facet_densities(&unit(), 5.0, 20, 3).unwrap();
        assert!(est.cells.mean > 0.5 && est.cells.mean < 1.5);
        assert!(est.euler.mean.abs() < 0.2);
    }

    #[test]
    fn cell_law_small_run() {
        let p = ModelParams::isotropic(1.0, 50.0).unwrap();
        let law = empirical_cell_law(&p, 200, 3, 8).unwrap();
        let d = ks_distance(&law.s_plus, |l| cell_half_length_cdf(l, 1.0));
        assert!(d < dkw_epsilon(200, 0.001), "{d}");
        let widths = width_sweep(&ModelParams::isotropic(1.0, 10.0).unwrap(), &[10.0, 100.0], 30, 3, 8).unwrap();
        assert!(widths[1].mean < widths[0].mean);
    }

    #[test]
    fn stationarity_small_run() {
        let check = stationarity_check(&unit(), Point2::new(2.0, 0.0), 1.0, 500, 4).unwrap();
        assert_eq!(check.at_origin.len(), 500);
        assert!(check.test.p_value > 0.001);
    }

    #[test]
    fn zero_replications_rejected() {
        assert!(empirical_nn_cdf(&unit(), 1.0, 0, 1).is_err());
        assert!(empirical_intensity(&unit(), 1.0, 0, 1).is_err());
    }
}
