//! Experiment dispatch, artifact writing and replay.

use std::cell::RefCell;
use std::fs;
use std::path::{Path, PathBuf};

use plcp_core::analytics::{
    cell_half_length_cdf, cell_length_cdf, cell_length_cdf_exact, facet_densities, laplace_functional,
    laplace_functional_radial, laplace_palm_radial, nn_cdf, nn_cdf_palm, tabulate, typical_line_factor, AnalyticsError,
    Evaluation,
};
use plcp_core::estimators::{
    empirical_cell_law, empirical_facet_densities, empirical_laplace, empirical_laplace_palm, empirical_nn_cdf,
    empirical_nn_cdf_palm, ks_distance, ks_threshold, width_sweep, EstimatorError, MonteCarloEstimate,
};
use plcp_core::io::{read_realization, write_realization, write_table};
use plcp_core::sampler::{sample_palm, sample_stationary, GENERATOR_NAME};
use plcp_core::tessellation::{build_voronoi, census_of, gqp_census};
use plcp_core::{Ecdf, Orientation, Point2, Realization, SampleError, SeedSpec, TessellationError};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::config::{is_config_key, ConfigError, Experiment, ExperimentConfig, RawConfig};
use crate::svg;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const TOLERANCE: i32 = 2;
    pub const NUMERIC: i32 = 3;
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot replay artifact: {0}")]
    Replay(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io { .. } | RunError::Replay(_) => exit::USAGE,
            RunError::Numeric(_) => exit::NUMERIC,
        }
    }
}

impl From<EstimatorError> for RunError {
    fn from(e: EstimatorError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

impl From<AnalyticsError> for RunError {
    fn from(e: AnalyticsError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

impl From<SampleError> for RunError {
    fn from(e: SampleError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

impl From<TessellationError> for RunError {
    fn from(e: TessellationError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

/// Files written by a run and the tolerances it violated.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            exit::OK
        } else {
            exit::TOLERANCE
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(what());
        }
    }
}

/// Resolved configuration plus generator and toolkit version.
pub fn metadata(config: &ExperimentConfig) -> Vec<(String, String)> {
    let mut pairs = config.to_pairs();
    pairs.push(("generator".into(), GENERATOR_NAME.into()));
    pairs.push(("version".into(), VERSION.into()));
    pairs
}

struct Writer<'a> {
    config: &'a ExperimentConfig,
    outcome: Outcome,
}

impl Writer<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn save(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        self.outcome.files.push(path);
        Ok(())
    }

    fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<f64>>) -> Result<(), RunError> {
        let mut buf = Vec::new();
        write_table(&mut buf, &metadata(self.config), header, rows).expect("writing to memory");
        self.save(name, &buf)
    }

    /// A flat JSON object with the resolved configuration under `config`.
    fn summary(&mut self, name: &str, mut fields: Map<String, Value>) -> Result<(), RunError> {
        fields.insert("config".into(), Value::String(self.config.to_text()));
        fields.insert("generator".into(), GENERATOR_NAME.into());
        fields.insert("version".into(), VERSION.into());
        fields.insert("pass".into(), Value::Bool(self.outcome.violations.is_empty()));
        let mut text = serde_json::to_string_pretty(&Value::Object(fields)).expect("JSON of plain values");
        text.push('\n');
        self.save(name, text.as_bytes())
    }
}

fn estimate_fields(prefix: &str, e: &MonteCarloEstimate, out: &mut Map<String, Value>) {
    out.insert(format!("{prefix}_mean"), json!(e.mean));
    out.insert(format!("{prefix}_stderr"), json!(e.stderr));
}

fn require_isotropic(config: &ExperimentConfig) -> Result<(), RunError> {
    if config.orientation != Orientation::Isotropic {
        return Err(ConfigError::Invalid {
            key: "orientation".into(),
            reason: format!("experiment {} needs isotropic lines", config.experiment),
        }
        .into());
    }
    Ok(())
}

/// Runs the configured experiment and writes its artifacts.
pub fn run(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    fs::create_dir_all(&config.output_dir).map_err(|source| RunError::Io {
        path: config.output_dir.clone(),
        source,
    })?;
    let mut w = Writer {
        config,
        outcome: Outcome::default(),
    };
    match config.experiment {
        Experiment::Sample => run_sample(&mut w)?,
        Experiment::NnCdf => run_nn_cdf(&mut w, false)?,
        Experiment::NnCdfPalm => run_nn_cdf(&mut w, true)?,
        Experiment::Laplace => run_laplace(&mut w)?,
        Experiment::Facets => run_facets(&mut w)?,
        Experiment::TypicalCell => run_typical_cell(&mut w)?,
        Experiment::Gqp => run_gqp(&mut w)?,
        Experiment::Render => run_render(&mut w)?,
    }
    Ok(w.outcome)
}

fn single_realization(config: &ExperimentConfig) -> Result<Realization, RunError> {
    let seed = SeedSpec::new(config.seed, config.replication);
    let params = config.params();
    Ok(if config.palm {
        sample_palm(&params, config.obs_radius, config.buffer, seed)?
    } else {
        sample_stationary(&params, config.obs_radius, config.buffer, seed)?
    })
}

fn run_sample(w: &mut Writer) -> Result<(), RunError> {
    let real = single_realization(w.config)?;
    // The realization writer records the generator itself.
    let meta: Vec<_> = metadata(w.config)
        .into_iter()
        .filter(|(k, _)| k != "generator")
        .collect();
    let mut buf = Vec::new();
    write_realization(&real, &meta, &mut buf).expect("writing to memory");
    w.save("sample.csv", &buf)
}

fn run_render(w: &mut Writer) -> Result<(), RunError> {
    let real = single_realization(w.config)?;
    let tess = if real.points.is_empty() {
        None
    } else {
        Some(build_voronoi(&real)?)
    };
    let meta = metadata(w.config);
    w.save("render.svg", svg::render(&real, tess.as_ref(), &meta).as_bytes())?;
    if let Some(t) = tess {
        let mut buf = Vec::new();
        for (k, v) in &meta {
            buf.extend_from_slice(format!("# {k}={v}\n").as_bytes());
        }
        t.write_dump(&mut buf).expect("writing to memory");
        w.save("render-tessellation.csv", &buf)?;
    }
    Ok(())
}

/// Evaluates `f` on every abscissa, failing on the first error.
fn curve(xs: &[f64], f: impl Fn(f64) -> Result<Evaluation, AnalyticsError>) -> Result<Vec<f64>, RunError> {
    xs.iter().map(|&x| Ok(f(x)?.value)).collect()
}

const COMPARISON_HEADER: [&str; 4] = ["r", "F_empirical", "F_analytic", "abs_gap"];

/// Rows of an empirical-versus-analytic curve and the largest gap.
fn comparison_rows(xs: &[f64], ecdf: &Ecdf, analytic: &[f64]) -> (Vec<Vec<f64>>, f64) {
    let mut max_gap: f64 = 0.0;
    let rows = xs
        .iter()
        .zip(analytic)
        .map(|(&r, &fa)| {
            let fe = ecdf.eval(r);
            max_gap = max_gap.max((fe - fa).abs());
            vec![r, fe, fa, (fe - fa).abs()]
        })
        .collect();
    (rows, max_gap)
}

/// KS distance against an analytic CDF whose evaluation can fail.
fn ks_against(ecdf: &Ecdf, f: impl Fn(f64) -> Result<Evaluation, AnalyticsError>) -> Result<f64, RunError> {
    let failure = RefCell::new(None);
    let d = ks_distance(ecdf, |x| match f(x) {
        Ok(e) => e.value,
        Err(err) => {
            failure.borrow_mut().get_or_insert(err);
            f64::NAN
        }
    });
    match failure.into_inner() {
        Some(e) => Err(e.into()),
        None => Ok(d),
    }
}

fn run_nn_cdf(w: &mut Writer, palm: bool) -> Result<(), RunError> {
    let c = w.config;
    require_isotropic(c)?;
    let params = c.params();
    let q = c.quadrature;
    let analytic = |r: f64| {
        if palm {
            nn_cdf_palm(r, &params, &q)
        } else {
            nn_cdf(r, &params, &q)
        }
    };
    let ecdf = if palm {
        empirical_nn_cdf_palm(&params, c.obs_radius, c.n, c.seed)?
    } else {
        empirical_nn_cdf(&params, c.obs_radius, c.n, c.seed)?
    };
    let xs = c.grid.abscissae();
    let f = curve(&xs, analytic)?;
    let ks = ks_against(&ecdf, analytic)?;
    let threshold = ks_threshold(c.n);
    let (rows, max_gap) = comparison_rows(&xs, &ecdf, &f);
    w.outcome
        .check(ks <= threshold, || format!("KS distance {ks} exceeds {threshold}"));
    let name = c.experiment.as_str();
    w.table(&format!("{name}.csv"), &COMPARISON_HEADER, rows)?;
    let analytic_rows = tabulate(&c.grid, |r| analytic(r).map(|e| e.value))?;
    w.table(
        &format!("{name}-analytic.csv"),
        &["r", "F_analytic"],
        analytic_rows.into_iter().map(|(r, v)| vec![r, v]).collect(),
    )?;
    let mut fields = Map::new();
    fields.insert("experiment".into(), json!(name));
    fields.insert("ks_statistic".into(), json!(ks));
    fields.insert("ks_threshold".into(), json!(threshold));
    fields.insert("max_abs_gap".into(), json!(max_gap));
    fields.insert("n".into(), json!(c.n));
    fields.insert("seed".into(), json!(c.seed));
    w.summary(&format!("{name}.json"), fields)
}

fn run_laplace(w: &mut Writer) -> Result<(), RunError> {
    let c = w.config;
    require_isotropic(c)?;
    let params = c.params();
    let q = c.quadrature;
    let radial_f = c.radial_function();
    let planar_f = c.planar_function();

    let radial = laplace_functional_radial(&radial_f, &params, &q)?;
    let general = laplace_functional(&planar_f, &params, &q)?;
    let palm_radial = laplace_palm_radial(&radial_f, &params, &q)?;
    let typical = typical_line_factor(&planar_f, &params, &q)?;
    let palm_general = general.value * typical.value;
    let mc = empirical_laplace(&planar_f, &params, c.obs_radius, c.n, c.seed)?;
    let mc_palm = empirical_laplace_palm(&planar_f, &params, c.obs_radius, c.n, c.seed)?;

    let tolerance = 10.0 * (q.abs_tol + q.rel_tol * radial.value.abs());
    let o = &mut w.outcome;
    o.check((radial.value - general.value).abs() <= tolerance, || {
        format!(
            "radial {} and general {} evaluators differ by more than {tolerance}",
            radial.value, general.value
        )
    });
    o.check(
        ((palm_radial.value - palm_general) / palm_radial.value).abs() < 1e-8,
        || format!("Palm factorization: {} vs {palm_general}", palm_radial.value),
    );
    o.check(mc.within(radial.value, 3.0), || {
        format!(
            "Monte Carlo {} ± {} is not within 3 standard errors of {}",
            mc.mean, mc.stderr, radial.value
        )
    });
    o.check(mc_palm.within(palm_radial.value, 3.0), || {
        format!(
            "Palm Monte Carlo {} ± {} is not within 3 standard errors of {}",
            mc_palm.mean, mc_palm.stderr, palm_radial.value
        )
    });

    let mut fields = Map::new();
    fields.insert("experiment".into(), json!("laplace"));
    fields.insert("function".into(), json!(c.function.as_str()));
    fields.insert("analytic_radial".into(), json!(radial.value));
    fields.insert("analytic_radial_error".into(), json!(radial.error));
    fields.insert("analytic_general".into(), json!(general.value));
    fields.insert("analytic_general_error".into(), json!(general.error));
    fields.insert("palm_analytic_radial".into(), json!(palm_radial.value));
    fields.insert("palm_analytic_general".into(), json!(palm_general));
    fields.insert("typical_line_factor".into(), json!(typical.value));
    estimate_fields("monte_carlo", &mc, &mut fields);
    estimate_fields("palm_monte_carlo", &mc_palm, &mut fields);
    fields.insert("n".into(), json!(c.n));
    fields.insert("seed".into(), json!(c.seed));
    w.summary("laplace.json", fields)
}

fn run_facets(w: &mut Writer) -> Result<(), RunError> {
    let c = w.config;
    let params = c.params();
    let est = empirical_facet_densities(&params, c.obs_radius, c.n, c.seed)?;
    let target = facet_densities(&params);
    let o = &mut w.outcome;
    for (name, e, t) in [
        ("vertices", &est.vertices, target.vertices),
        ("edges", &est.edges, target.edges),
        ("cells", &est.cells, target.cells),
    ] {
        o.check(((e.mean - t) / t).abs() <= 0.03, || {
            format!("{name} density {} is not within 3% of {t}", e.mean)
        });
    }
    o.check(est.euler.within(0.0, 3.0), || {
        format!(
            "Euler combination {} ± {} is not within 3 standard errors of 0",
            est.euler.mean, est.euler.stderr
        )
    });
    let mut fields = Map::new();
    fields.insert("experiment".into(), json!("facets"));
    estimate_fields("vertices", &est.vertices, &mut fields);
    estimate_fields("edges", &est.edges, &mut fields);
    estimate_fields("cells", &est.cells, &mut fields);
    estimate_fields("euler", &est.euler, &mut fields);
    fields.insert("vertices_target".into(), json!(target.vertices));
    fields.insert("edges_target".into(), json!(target.edges));
    fields.insert("cells_target".into(), json!(target.cells));
    fields.insert("counting_radius".into(), json!(est.counting_radius));
    fields.insert("n".into(), json!(c.n));
    fields.insert("seed".into(), json!(c.seed));
    w.summary("facets.json", fields)
}

fn run_typical_cell(w: &mut Writer) -> Result<(), RunError> {
    let c = w.config;
    let params = c.params();
    let lambda = c.lambda_l;
    let law = empirical_cell_law(&params, c.n, c.max_retries, c.seed)?;
    let ks_s_plus = ks_distance(&law.s_plus, |l| cell_half_length_cdf(l, lambda));
    let ks_length = ks_distance(&law.length, |l| cell_length_cdf(l, lambda));
    // Diagnostic only: the limit law with dependent halves.
    let exact = |l: f64| cell_length_cdf_exact(l, lambda, &c.quadrature);
    let ks_length_exact = ks_against(&law.length, exact)?;
    let threshold = ks_threshold(c.n);
    let widths = width_sweep(&params, &c.mus, c.sweep_n, c.max_retries, c.seed)?;

    let o = &mut w.outcome;
    o.check(ks_s_plus <= threshold, || {
        format!("KS distance of S+ {ks_s_plus} exceeds {threshold}")
    });
    o.check(ks_length <= threshold, || {
        format!("KS distance of |S| {ks_length} exceeds {threshold}")
    });
    o.check(law.mean_length.within(1.0 / lambda, 3.0), || {
        format!(
            "mean length {} ± {} is not within 3 standard errors of {}",
            law.mean_length.mean,
            law.mean_length.stderr,
            1.0 / lambda
        )
    });
    o.check(widths.windows(2).all(|p| p[1].mean < p[0].mean), || {
        "mean width does not decrease along the intensity sweep".to_string()
    });

    let xs = c.grid.abscissae();
    let curves = [
        (
            "typical-cell-length.csv",
            &law.length,
            xs.iter().map(|&l| cell_length_cdf(l, lambda)).collect(),
        ),
        ("typical-cell-length-exact.csv", &law.length, curve(&xs, exact)?),
        (
            "typical-cell-s-plus.csv",
            &law.s_plus,
            xs.iter().map(|&l| cell_half_length_cdf(l, lambda)).collect(),
        ),
    ];
    for (name, ecdf, f) in curves {
        let (rows, _) = comparison_rows(&xs, ecdf, &f);
        w.table(name, &COMPARISON_HEADER, rows)?;
    }
    let mut fields = Map::new();
    fields.insert("experiment".into(), json!("typical-cell"));
    fields.insert("ks_s_plus".into(), json!(ks_s_plus));
    fields.insert("ks_length".into(), json!(ks_length));
    fields.insert("ks_length_exact".into(), json!(ks_length_exact));
    fields.insert("ks_threshold".into(), json!(threshold));
    estimate_fields("length", &law.mean_length, &mut fields);
    estimate_fields("width", &law.width, &mut fields);
    for (mu, e) in c.mus.iter().zip(&widths) {
        estimate_fields(&format!("width_mu_{mu}"), e, &mut fields);
    }
    fields.insert("window_retries".into(), json!(law.retries));
    fields.insert("n".into(), json!(c.n));
    fields.insert("seed".into(), json!(c.seed));
    w.summary("typical-cell.json", fields)
}

fn run_gqp(w: &mut Writer) -> Result<(), RunError> {
    let c = w.config;
    let params = c.params();
    let counts: Vec<usize> = (0..c.n as u64)
        .into_par_iter()
        .map(|i| -> Result<usize, RunError> {
            let real = sample_stationary(&params, c.obs_radius, c.buffer, SeedSpec::new(c.seed, i))?;
            Ok(gqp_census(&real)?)
        })
        .collect::<Result<_, _>>()?;
    let total: usize = counts.iter().sum();
    let square = [
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
        Point2::new(-1.0, 0.0),
        Point2::new(0.0, -1.0),
    ];
    let fixture = census_of(&square)?;
    let o = &mut w.outcome;
    o.check(total == 0, || {
        format!("{total} cocircular quadruples in sampled realizations")
    });
    o.check(fixture >= 1, || "the cocircular fixture was not detected".to_string());
    let mut fields = Map::new();
    fields.insert("experiment".into(), json!("gqp"));
    fields.insert("cocircular_total".into(), json!(total));
    fields.insert("fixture_cocircular".into(), json!(fixture));
    fields.insert("n".into(), json!(c.n));
    fields.insert("seed".into(), json!(c.seed));
    w.summary("gqp.json", fields)
}

/// Metadata pairs embedded in any artifact written by [`run`].
pub fn artifact_metadata(text: &str) -> Result<Vec<(String, String)>, RunError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with("[metadata]") {
        let (_, pairs) = read_realization(text).map_err(|e| RunError::Replay(e.to_string()))?;
        Ok(pairs)
    } else if trimmed.starts_with('{') {
        let value: Value = serde_json::from_str(text).map_err(|e| RunError::Replay(e.to_string()))?;
        let mut pairs = Vec::new();
        for key in ["generator", "version"] {
            if let Some(v) = value.get(key).and_then(Value::as_str) {
                pairs.push((key.to_string(), v.to_string()));
            }
        }
        let config = value
            .get("config")
            .and_then(Value::as_str)
            .ok_or_else(|| RunError::Replay("JSON summary has no config field".into()))?;
        pairs.extend(
            config
                .lines()
                .filter_map(|l| l.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string())),
        );
        Ok(pairs)
    } else if trimmed.starts_with("<?xml") || trimmed.starts_with("<svg") {
        svg::metadata_of(text).ok_or_else(|| RunError::Replay("SVG has no metadata comment".into()))
    } else {
        Ok(text
            .lines()
            .map_while(|l| l.strip_prefix("# "))
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect())
    }
}

/// Rebuilds the configuration recorded in an artifact.
pub fn config_from_artifact(text: &str) -> Result<ExperimentConfig, RunError> {
    let pairs = artifact_metadata(text)?;
    if let Some((_, g)) = pairs.iter().find(|(k, _)| k == "generator") {
        if g != GENERATOR_NAME {
            return Err(RunError::Replay(format!(
                "artifact was made with generator {g}, this build uses {GENERATOR_NAME}"
            )));
        }
    }
    let mut raw = RawConfig::default();
    for (k, v) in pairs.iter().filter(|(k, _)| is_config_key(k)) {
        raw.set(k, v)?;
    }
    Ok(raw.resolve()?)
}

/// Re-runs the experiment recorded in `artifact`, writing into `output_dir`.
pub fn replay(artifact: &Path, output_dir: &Path) -> Result<Outcome, RunError> {
    let text = fs::read_to_string(artifact).map_err(|source| RunError::Io {
        path: artifact.to_path_buf(),
        source,
    })?;
    let mut config = config_from_artifact(&text)?;
    config.output_dir = output_dir.to_path_buf();
    run(&config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn metadata_ends_with_generator_and_version() {
        let c = parse_config("experiment=sample").unwrap();
        let m = metadata(&c);
        assert_eq!(m[m.len() - 2].0, "generator");
        assert_eq!(m[m.len() - 1], ("version".to_string(), VERSION.to_string()));
    }

    #[test]
    fn csv_comment_metadata() {
        let text = "# experiment=nn-cdf\n# mu=2\nr,F_analytic\n0,0\n";
        let c = config_from_artifact(text).unwrap();
        assert_eq!(c.experiment, Experiment::NnCdf);
        assert_eq!(c.mu, 2.0);
    }

    #[test]
    fn foreign_generator_is_rejected() {
        let text = "# experiment=nn-cdf\n# generator=other\nr\n";
        assert!(matches!(config_from_artifact(text), Err(RunError::Replay(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Numeric("x".into()).exit_code(), exit::NUMERIC);
        assert_eq!(
            RunError::Config(ConfigError::Missing("experiment")).exit_code(),
            exit::USAGE
        );
        let mut o = Outcome::default();
        assert_eq!(o.exit_code(), exit::OK);
        o.check(false, || "bad".into());
        assert_eq!(o.exit_code(), exit::TOLERANCE);
    }
}
