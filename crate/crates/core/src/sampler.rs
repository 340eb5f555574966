//! Seeded sampling of the Poisson line process and the line-supported Cox
//! process in a disk, under the stationary and the Palm distribution.
//!
//! Every random quantity is drawn from its own ChaCha12 stream, keyed by the
//! replication's [`SeedSpec`] and addressed by `(purpose, line index)`. Lines
//! are generated outward in increasing `|r|` and the points of each line
//! outward from the foot of its perpendicular, both as sequences of
//! exponential gaps. The law is the usual one (Poisson line count, uniform
//! `r`, Poisson point counts, uniform arc coordinates), and in addition a
//! realization in a disk of radius `R` is exactly the restriction of the
//! realization with the same seed in any larger disk. Enlarging the window of
//! a single replication therefore reveals more of the same sample instead of
//! drawing a new one.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{chord_half_length, line_point, GeometryError, LineParams, Point2};

/// Recorded in every artifact that depends on random draws.
pub const GENERATOR_NAME: &str = "chacha12-splitmix64-keyed";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("invalid model parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> SampleError {
    SampleError::InvalidParameter { name, value, reason }
}

/// Orientation distribution `G(dθ)` of the lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `θ` uniform on `[0, π)`.
    Isotropic,
    /// `θ ∈ {0, π/2}` with probability one half each.
    Manhattan,
}

impl Orientation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Orientation::Isotropic => "isotropic",
            Orientation::Manhattan => "manhattan",
        }
    }

    fn sample_angle<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Orientation::Isotropic => rng.random::<f64>() * PI,
            Orientation::Manhattan => {
                if rng.random::<bool>() {
                    FRAC_PI_2
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::str::FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "isotropic" => Ok(Orientation::Isotropic),
            "manhattan" => Ok(Orientation::Manhattan),
            other => Err(format!("unknown orientation `{other}`")),
        }
    }
}

/// Line intensity `lambda_l`, on-line point intensity `mu`, and `G(dθ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda_l: f64,
    pub mu: f64,
    pub orientation: Orientation,
}

impl ModelParams {
    pub fn new(lambda_l: f64, mu: f64, orientation: Orientation) -> Result<Self, SampleError> {
        if !(lambda_l > 0.0 && lambda_l.is_finite()) {
            return Err(invalid("lambda_l", lambda_l, "must be positive and finite"));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid("mu", mu, "must be positive and finite"));
        }
        Ok(ModelParams {
            lambda_l,
            mu,
            orientation,
        })
    }

    pub fn isotropic(lambda_l: f64, mu: f64) -> Result<Self, SampleError> {
        Self::new(lambda_l, mu, Orientation::Isotropic)
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self, SampleError> {
        Self::new(self.lambda_l, mu, self.orientation)
    }
}

/// Buffer added around the observation window so that the nearest line and
/// the nearest point to any observation location fall inside the simulated
/// disk with overwhelming probability.
pub fn default_buffer(params: &ModelParams, max_query_distance: f64) -> f64 {
    let line_scale = 4.0 / (2.0 * params.lambda_l);
    let point_scale = 4.0 / (PI * params.mu * params.lambda_l).sqrt();
    max_query_distance.max(line_scale).max(point_scale)
}

/// Identifies one replication of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replication_index: u64,
}

/// What a random stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stream {
    Lines,
    Points { line: u64, forward: bool },
    TypicalAngle,
    TypicalPoints { forward: bool },
    Increment { level: u32, line: u64, forward: bool },
    TypicalIncrement { level: u32, forward: bool },
}

impl Stream {
    // 8-bit tag | 16-bit level | 40-bit line index
    fn id(self) -> u64 {
        let (tag, level, line): (u64, u64, u64) = match self {
            Stream::Lines => (1, 0, 0),
            Stream::Points { line, forward } => (2 + u64::from(!forward), 0, line),
            Stream::TypicalAngle => (4, 0, 0),
            Stream::TypicalPoints { forward } => (5 + u64::from(!forward), 0, 0),
            Stream::Increment { level, line, forward } => (7 + u64::from(!forward), u64::from(level), line),
            Stream::TypicalIncrement { level, forward } => (9 + u64::from(!forward), u64::from(level), 0),
        };
        debug_assert!(level < 1 << 16 && line < 1 << 40);
        (tag << 56) | (level << 40) | line
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64, replication_index: u64) -> Self {
        SeedSpec {
            master_seed,
            replication_index,
        }
    }

    /// 256-bit ChaCha key: a SplitMix64 chain over the master seed, re-seeded
    /// with the replication index.
    fn key(&self) -> [u8; 32] {
        let mut state = self.master_seed;
        let head = splitmix64(&mut state);
        let mut state = head ^ self.replication_index.wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        key
    }

    pub(crate) fn stream(&self, purpose: Stream) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::from_seed(self.key());
        rng.set_stream(purpose.id());
        rng
    }
}

/// A point of the Cox process together with the line that carries it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoxPoint {
    pub position: Point2,
    pub line_index: usize,
    pub t: f64,
}

/// One sample of the model in the disk of radius `sim_radius`.
///
/// Under the Palm distribution `lines[0]` is the typical line through the
/// origin and `points[0]` is the typical point at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub lines: Vec<LineParams>,
    pub points: Vec<CoxPoint>,
    pub sim_radius: f64,
    pub obs_radius: f64,
    pub palm: bool,
}

impl Realization {
    /// Positions of the points, in point order.
    pub fn positions(&self) -> Vec<Point2> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// Number of points within distance `radius` of `center`.
    pub fn count_in_ball(&self, center: Point2, radius: f64) -> usize {
        let r2 = radius * radius;
        self.points
            .iter()
            .filter(|p| p.position.distance_squared(center) <= r2)
            .count()
    }

    /// Distance from the origin to the nearest point, skipping the Palm atom.
    pub fn nearest_distance_from_origin(&self) -> Option<f64> {
        let skip = usize::from(self.palm);
        self.points[skip.min(self.points.len())..]
            .iter()
            .map(|p| p.position.norm())
            .min_by(f64::total_cmp)
    }

    /// The realization after rotating the plane counterclockwise by `angle`.
    /// Arc coordinates are re-expressed on the canonical rotated lines.
    pub fn rotated(&self, angle: f64) -> Realization {
        let mut flips = Vec::with_capacity(self.lines.len());
        let lines = self
            .lines
            .iter()
            .map(|l| {
                let rotated = l.rotated(angle);
                let same_direction = rotated.direction().dot(l.direction().rotated(angle)) > 0.0;
                flips.push(if same_direction { 1.0 } else { -1.0 });
                rotated
            })
            .collect::<Vec<_>>();
        let points = self
            .points
            .iter()
            .map(|p| {
                let t = p.t * flips[p.line_index];
                CoxPoint {
                    position: line_point(&lines[p.line_index], t),
                    line_index: p.line_index,
                    t,
                }
            })
            .collect();
        Realization {
            lines,
            points,
            sim_radius: self.sim_radius,
            obs_radius: self.obs_radius,
            palm: self.palm,
        }
    }

    /// Palm realization rotated so that the typical line is the x-axis.
    pub fn with_typical_line_horizontal(&self) -> Realization {
        match (self.palm, self.lines.first()) {
            (true, Some(l)) => self.rotated(-l.theta()),
            _ => self.clone(),
        }
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.obs_radius > self.sim_radius {
            return Err(format!(
                "obs_radius {} exceeds sim_radius {}",
                self.obs_radius, self.sim_radius
            ));
        }
        if let Some(l) = self.lines.iter().find(|l| l.r().abs() > self.sim_radius) {
            return Err(format!("line {l:?} outside the simulation window"));
        }
        let slack = 1.0 + 1e-12;
        for (i, p) in self.points.iter().enumerate() {
            if p.position.norm() > self.sim_radius * slack {
                return Err(format!("point {i} outside the simulation window"));
            }
            let Some(line) = self.lines.get(p.line_index) else {
                return Err(format!("point {i} refers to a missing line"));
            };
            let expected = line_point(line, p.t);
            if expected != p.position {
                return Err(format!("point {i} is not at its arc coordinate"));
            }
        }
        if self.palm {
            match (self.lines.first(), self.points.first()) {
                (Some(l), Some(p)) if l.r() == 0.0 && p.position == Point2::ORIGIN => {}
                _ => return Err("Palm realization without typical line/point".into()),
            }
        }
        Ok(())
    }
}

fn check_radius(name: &'static str, value: f64) -> Result<(), SampleError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, value, "must be positive and finite"))
    }
}

/// Appends the points of a PPP of intensity `mu` on `[-half, half]`, walking
/// outward from `t = 0` in both directions.
fn walk_outward(forward: &mut ChaCha12Rng, backward: &mut ChaCha12Rng, mu: f64, half: f64, mut push: impl FnMut(f64)) {
    let gap = Exp::new(mu).expect("mu validated positive");
    let mut t = 0.0;
    loop {
        t += gap.sample(forward);
        if t > half {
            break;
        }
        push(t);
    }
    let mut t = 0.0;
    loop {
        t += gap.sample(backward);
        if t > half {
            break;
        }
        push(-t);
    }
}

/// Lines of the Poisson line process hitting the disk of radius `radius`,
/// in increasing order of `|r|`.
pub fn sample_plp(params: &ModelParams, radius: f64, seed: SeedSpec) -> Result<Vec<LineParams>, SampleError> {
    check_radius("radius", radius)?;
    let mut rng = seed.stream(Stream::Lines);
    // |r| of the lines is a PPP of rate 2·lambda_l on [0, ∞).
    let gap = Exp::new(2.0 * params.lambda_l).expect("lambda_l validated positive");
    let mut lines = Vec::new();
    let mut distance = 0.0;
    loop {
        distance += gap.sample(&mut rng);
        if distance > radius {
            break;
        }
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let theta = params.orientation.sample_angle(&mut rng);
        lines.push(LineParams::new(sign * distance, theta)?);
    }
    Ok(lines)
}

/// Independent PPPs of intensity `mu` on the chords that `lines` cut from the
/// disk of radius `radius`. Line `i` of the slice uses the point streams of
/// index `i`.
pub fn sample_cox(lines: &[LineParams], mu: f64, radius: f64, seed: SeedSpec) -> Result<Vec<CoxPoint>, SampleError> {
    check_radius("radius", radius)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid("mu", mu, "must be positive and finite"));
    }
    let mut points = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        append_line_points(&mut points, line, i, i as u64, mu, radius, seed, None)?;
    }
    Ok(points)
}

#[allow(clippy::too_many_arguments)]
fn append_line_points(
    out: &mut Vec<CoxPoint>,
    line: &LineParams,
    line_index: usize,
    stream_index: u64,
    mu: f64,
    radius: f64,
    seed: SeedSpec,
    increment_level: Option<u32>,
) -> Result<(), SampleError> {
    let half = chord_half_length(line.r(), radius)?;
    let stream = |forward| match increment_level {
        None => Stream::Points {
            line: stream_index,
            forward,
        },
        Some(level) => Stream::Increment {
            level,
            line: stream_index,
            forward,
        },
    };
    let mut fwd = seed.stream(stream(true));
    let mut bwd = seed.stream(stream(false));
    walk_outward(&mut fwd, &mut bwd, mu, half, |t| {
        out.push(CoxPoint {
            position: line_point(line, t),
            line_index,
            t,
        })
    });
    Ok(())
}

/// A stationary realization in the disk of radius `obs_radius + buffer`.
pub fn sample_stationary(
    params: &ModelParams,
    obs_radius: f64,
    buffer: f64,
    seed: SeedSpec,
) -> Result<Realization, SampleError> {
    check_radius("obs_radius", obs_radius)?;
    if !(buffer >= 0.0 && buffer.is_finite()) {
        return Err(invalid("buffer", buffer, "must be nonnegative and finite"));
    }
    let sim_radius = obs_radius + buffer;
    let lines = sample_plp(params, sim_radius, seed)?;
    let points = sample_cox(&lines, params.mu, sim_radius, seed)?;
    Ok(Realization {
        lines,
        points,
        sim_radius,
        obs_radius,
        palm: false,
    })
}

/// A realization under the Palm distribution: the stationary sample with the
/// same seed, plus a typical line through the origin carrying its own PPP and
/// the typical point at the origin.
pub fn sample_palm(
    params: &ModelParams,
    obs_radius: f64,
    buffer: f64,
    seed: SeedSpec,
) -> Result<Realization, SampleError> {
    let stationary = sample_stationary(params, obs_radius, buffer, seed)?;
    let sim_radius = stationary.sim_radius;

    let theta = params.orientation.sample_angle(&mut seed.stream(Stream::TypicalAngle));
    let typical = LineParams::new(0.0, theta)?;

    let mut lines = Vec::with_capacity(stationary.lines.len() + 1);
    lines.push(typical);
    lines.extend_from_slice(&stationary.lines);

    let mut points = Vec::with_capacity(stationary.points.len() + 1);
    points.push(CoxPoint {
        position: Point2::ORIGIN,
        line_index: 0,
        t: 0.0,
    });
    let mut fwd = seed.stream(Stream::TypicalPoints { forward: true });
    let mut bwd = seed.stream(Stream::TypicalPoints { forward: false });
    walk_outward(&mut fwd, &mut bwd, params.mu, sim_radius, |t| {
        points.push(CoxPoint {
            position: line_point(&typical, t),
            line_index: 0,
            t,
        })
    });
    points.extend(stationary.points.iter().map(|p| CoxPoint {
        line_index: p.line_index + 1,
        ..*p
    }));

    Ok(Realization {
        lines,
        points,
        sim_radius,
        obs_radius,
        palm: true,
    })
}

/// Superposes an independent PPP of intensity `extra_mu` on every line of
/// `real`. A `mu`-realization densified this way is a `(mu + extra_mu)`
/// realization; distinct `level`s give independent increments.
pub fn densify(real: &Realization, extra_mu: f64, level: u32, seed: SeedSpec) -> Result<Realization, SampleError> {
    if !(extra_mu > 0.0 && extra_mu.is_finite()) {
        return Err(invalid("extra_mu", extra_mu, "must be positive and finite"));
    }
    let mut out = real.clone();
    for (i, line) in real.lines.iter().enumerate() {
        if real.palm && i == 0 {
            let mut fwd = seed.stream(Stream::TypicalIncrement { level, forward: true });
            let mut bwd = seed.stream(Stream::TypicalIncrement { level, forward: false });
            walk_outward(&mut fwd, &mut bwd, extra_mu, real.sim_radius, |t| {
                out.points.push(CoxPoint {
                    position: line_point(line, t),
                    line_index: 0,
                    t,
                })
            });
        } else {
            let stream_index = (i - usize::from(real.palm)) as u64;
            append_line_points(
                &mut out.points,
                line,
                i,
                stream_index,
                extra_mu,
                real.sim_radius,
                seed,
                Some(level),
            )?;
        }
    }
    Ok(out)
}

/// Palm realizations at increasing intensities `mus`, coupled so that each
/// one contains all points of the previous one.
pub fn sample_palm_coupled(
    params: &ModelParams,
    mus: &[f64],
    obs_radius: f64,
    buffer: f64,
    seed: SeedSpec,
) -> Result<Vec<Realization>, SampleError> {
    let Some(&first) = mus.first() else {
        return Ok(Vec::new());
    };
    if mus
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(invalid("mu", first, "coupled intensities must increase"));
    }
    let base = sample_palm(&params.with_mu(first)?, obs_radius, buffer, seed)?;
    let mut out = vec![base];
    for (level, w) in mus.windows(2).enumerate() {
        let next = densify(out.last().unwrap(), w[1] - w[0], level as u32, seed)?;
        out.push(next);
    }
    Ok(out)
}
