//! Flat `key=value` experiment configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use plcp_core::analytics::{CurveGrid, PlanarFunction, RadialFunction};
use plcp_core::sampler::default_buffer;
use plcp_core::{ModelParams, Orientation, QuadratureSpec};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("line {0}: expected key=value")]
    Syntax(usize),
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Sample,
    NnCdf,
    NnCdfPalm,
    Laplace,
    Facets,
    TypicalCell,
    Gqp,
    Render,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Sample,
        Experiment::NnCdf,
        Experiment::NnCdfPalm,
        Experiment::Laplace,
        Experiment::Facets,
        Experiment::TypicalCell,
        Experiment::Gqp,
        Experiment::Render,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Sample => "sample",
            Experiment::NnCdf => "nn-cdf",
            Experiment::NnCdfPalm => "nn-cdf-palm",
            Experiment::Laplace => "laplace",
            Experiment::Facets => "facets",
            Experiment::TypicalCell => "typical-cell",
            Experiment::Gqp => "gqp",
            Experiment::Render => "render",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.as_str()).collect();
            invalid("experiment", format!("`{s}` is not one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    Gaussian,
    PathLoss,
}

impl FunctionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FunctionKind::Gaussian => "gaussian",
            FunctionKind::PathLoss => "path-loss",
        }
    }
}

/// A fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub lambda_l: f64,
    pub mu: f64,
    pub orientation: Orientation,
    pub obs_radius: f64,
    pub buffer: f64,
    pub grid: CurveGrid,
    pub n: usize,
    pub seed: u64,
    /// Replication index for single-realization experiments.
    pub replication: u64,
    pub palm: bool,
    pub quadrature: QuadratureSpec,
    pub function: FunctionKind,
    pub alpha: f64,
    pub scale: f64,
    pub exclusion: f64,
    /// Intensities of the coupled width sweep.
    pub mus: Vec<f64>,
    pub sweep_n: usize,
    pub max_retries: u32,
    /// Not part of the metadata, so replays elsewhere stay byte-identical.
    pub output_dir: PathBuf,
}

const KEYS: [&str; 24] = [
    "experiment",
    "lambda_l",
    "mu",
    "orientation",
    "obs_radius",
    "buffer",
    "grid_min",
    "grid_max",
    "grid_count",
    "n",
    "seed",
    "replication",
    "palm",
    "abs_tol",
    "rel_tol",
    "max_subdivisions",
    "trunc_tail",
    "function",
    "alpha",
    "scale",
    "exclusion",
    "mus",
    "sweep_n",
    "max_retries",
];

/// True for keys recorded in artifact metadata.
pub fn is_config_key(key: &str) -> bool {
    KEYS.contains(&key)
}

/// Raw key/value pairs; later entries win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pairs: Vec<(String, String)>,
}

impl RawConfig {
    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax(no + 1))?;
            raw.set(k.trim(), v.trim())?;
        }
        Ok(raw)
    }

    /// Sets `key`, accepting `-` for `_` in key names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.replace('-', "_");
        if key != "output_dir" && !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        self.pairs.push((key, value.to_string()));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e: T::Err| invalid(key, format!("`{v}`: {e}"))),
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.parsed(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(key, format!("must be positive and finite, got {v}")))
        }
    }

    /// Validates every field and fills defaults.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let experiment: Experiment = self
            .get("experiment")
            .ok_or(ConfigError::Missing("experiment"))?
            .parse()?;
        let lambda_l = self.positive("lambda_l", 1.0)?;
        let mu = self.positive("mu", 1.0)?;
        let orientation: Orientation = self.parsed("orientation", Orientation::Isotropic)?;
        let params = ModelParams::new(lambda_l, mu, orientation).map_err(|e| invalid("mu", e.to_string()))?;

        let function = match self.get("function").unwrap_or("gaussian") {
            "gaussian" => FunctionKind::Gaussian,
            "path-loss" => FunctionKind::PathLoss,
            other => return Err(invalid("function", format!("`{other}` is not gaussian or path-loss"))),
        };
        let alpha = self.positive("alpha", 4.0)?;
        let scale = self.positive("scale", 1.0)?;
        let exclusion = self.positive("exclusion", 0.1)?;

        let default_obs = match experiment {
            Experiment::NnCdf | Experiment::NnCdfPalm => 1.0,
            Experiment::Laplace => match function {
                FunctionKind::Gaussian => 6.0,
                FunctionKind::PathLoss => 50.0,
            },
            Experiment::Facets => 10.0,
            _ => 5.0,
        };
        let obs_radius = self.positive("obs_radius", default_obs)?;
        let buffer = match self.get("buffer") {
            None | Some("auto") => default_buffer(&params, 0.0),
            Some(_) => {
                let b: f64 = self.parsed("buffer", 0.0)?;
                if !(b >= 0.0 && b.is_finite()) {
                    return Err(invalid("buffer", format!("must be nonnegative and finite, got {b}")));
                }
                b
            }
        };

        let grid_min: f64 = self.parsed("grid_min", 0.0)?;
        let grid_max: f64 = self.parsed("grid_max", 3.0)?;
        let grid_count: usize = self.parsed("grid_count", 61)?;
        if !(grid_min >= 0.0 && grid_min.is_finite()) {
            return Err(invalid("grid_min", "must be nonnegative"));
        }
        if !(grid_max >= grid_min && grid_max.is_finite()) {
            return Err(invalid("grid_max", "must be finite and at least grid_min"));
        }
        if grid_count == 0 {
            return Err(invalid("grid_count", "must be at least 1"));
        }
        let grid = CurveGrid::new(grid_min, grid_max, grid_count).map_err(|e| invalid("grid_max", e.to_string()))?;

        let n: usize = self.parsed("n", 1000)?;
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        let seed: u64 = self.parsed("seed", 1)?;
        let replication: u64 = self.parsed("replication", 0)?;
        let palm: bool = self.parsed("palm", false)?;

        let defaults = QuadratureSpec::default();
        let max_subdivisions: usize = self.parsed("max_subdivisions", defaults.max_subdivisions)?;
        if max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", "must be at least 1"));
        }
        let quadrature = QuadratureSpec {
            abs_tol: self.positive("abs_tol", defaults.abs_tol)?,
            rel_tol: self.positive("rel_tol", defaults.rel_tol)?,
            max_subdivisions,
            trunc_tail: self.positive("trunc_tail", defaults.trunc_tail)?,
        };

        let mus = match self.get("mus") {
            None => vec![10.0, 100.0, 1000.0],
            Some(text) => text
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| invalid("mus", format!("`{s}`: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        if mus.is_empty() || mus.iter().any(|m| !(*m > 0.0 && m.is_finite())) || mus.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("mus", "must be positive and strictly increasing"));
        }
        let sweep_n: usize = self.parsed("sweep_n", 500)?;
        if sweep_n == 0 {
            return Err(invalid("sweep_n", "must be at least 1"));
        }
        let max_retries: u32 = self.parsed("max_retries", 3)?;
        let output_dir = PathBuf::from(self.get("output_dir").unwrap_or("."));

        Ok(ExperimentConfig {
            experiment,
            lambda_l,
            mu,
            orientation,
            obs_radius,
            buffer,
            grid,
            n,
            seed,
            replication,
            palm,
            quadrature,
            function,
            alpha,
            scale,
            exclusion,
            mus,
            sweep_n,
            max_retries,
            output_dir,
        })
    }
}

/// Parses a configuration text with defaults filled in.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    RawConfig::parse(text)?.resolve()
}

impl ExperimentConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.lambda_l, self.mu, self.orientation).expect("validated at parse time")
    }

    pub fn radial_function(&self) -> RadialFunction {
        match self.function {
            FunctionKind::Gaussian => RadialFunction::gaussian().scaled(self.scale),
            FunctionKind::PathLoss => {
                RadialFunction::path_loss(self.scale, self.alpha, self.exclusion).expect("validated at parse time")
            }
        }
    }

    pub fn planar_function(&self) -> PlanarFunction {
        PlanarFunction::from_radial(&self.radial_function())
    }

    /// Every key except `output_dir`, in a fixed order, with resolved
    /// values. Parsing these pairs gives back the same configuration.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let q = &self.quadrature;
        let mus: Vec<String> = self.mus.iter().map(f64::to_string).collect();
        let values: [String; 24] = [
            self.experiment.to_string(),
            self.lambda_l.to_string(),
            self.mu.to_string(),
            self.orientation.as_str().to_string(),
            self.obs_radius.to_string(),
            self.buffer.to_string(),
            self.grid.min.to_string(),
            self.grid.max.to_string(),
            self.grid.count.to_string(),
            self.n.to_string(),
            self.seed.to_string(),
            self.replication.to_string(),
            self.palm.to_string(),
            q.abs_tol.to_string(),
            q.rel_tol.to_string(),
            q.max_subdivisions.to_string(),
            q.trunc_tail.to_string(),
            self.function.as_str().to_string(),
            self.alpha.to_string(),
            self.scale.to_string(),
            self.exclusion.to_string(),
            mus.join(","),
            self.sweep_n.to_string(),
            self.max_retries.to_string(),
        ];
        KEYS.iter().map(|k| k.to_string()).zip(values).collect()
    }

    /// The resolved configuration as `key=value` lines.
    pub fn to_text(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("lambda_l=1.0\nmu=1.0\nexperiment=nn-cdf").unwrap();
        assert_eq!(c.experiment, Experiment::NnCdf);
        assert_eq!(c.grid.count, 61);
        assert_eq!(c.quadrature, QuadratureSpec::default());
        assert_eq!(c.orientation, Orientation::Isotropic);
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_config("experiment=nn-cdf\nmu=-1").unwrap_err();
        assert!(matches!(&e, ConfigError::Invalid { key, .. } if key == "mu"), "{e}");
        assert_eq!(parse_config("mu=1").unwrap_err(), ConfigError::Missing("experiment"));
        assert_eq!(
            parse_config("experiment=gqp\nfoo=1").unwrap_err(),
            ConfigError::UnknownKey("foo".into())
        );
        let e = parse_config("experiment=gqp\nn=ten").unwrap_err();
        assert!(matches!(&e, ConfigError::Invalid { key, .. } if key == "n"));
        assert!(parse_config("experiment=walk").is_err());
        assert_eq!(
            parse_config("experiment=gqp\njunk").unwrap_err(),
            ConfigError::Syntax(2)
        );
        assert!(parse_config("experiment=typical-cell\nmus=100,10").is_err());
    }

    #[test]
    fn later_values_win_and_comments_are_skipped() {
        let mut raw = RawConfig::parse("# header\nexperiment=facets\nmu=2 # inline\n").unwrap();
        raw.set("mu", "3").unwrap();
        raw.set("obs-radius", "7").unwrap();
        let c = raw.resolve().unwrap();
        assert_eq!(c.mu, 3.0);
        assert_eq!(c.obs_radius, 7.0);
    }

    #[test]
    fn pairs_round_trip() {
        let c = parse_config("experiment=laplace\nfunction=path-loss\nmus=1,2.5\nbuffer=0.25\nseed=99").unwrap();
        let again = parse_config(&c.to_text()).unwrap();
        assert_eq!(again, c);
        assert!(!c.to_text().contains("output_dir"));
    }
}
