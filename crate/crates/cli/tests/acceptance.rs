//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use plcp_cli::config::{Experiment, RawConfig};
use plcp_cli::run::{replay, run};
use plcp_core::analytics::{
    cell_half_length_cdf, cell_length_cdf, cell_length_cdf_exact, facet_densities, laplace_functional,
    laplace_functional_radial, laplace_palm_radial, nn_cdf, nn_cdf_palm, typical_line_factor, CurveGrid,
};
use plcp_core::estimators::{
    dkw_epsilon, empirical_cell_law, empirical_facet_densities, empirical_intensity, empirical_laplace,
    empirical_laplace_palm, empirical_nn_cdf, empirical_nn_cdf_palm, ks_distance, stationarity_check, width_sweep,
};
use plcp_core::sampler::{sample_stationary, SeedSpec};
use plcp_core::tessellation::{census_of, gqp_census};
use plcp_core::{ModelParams, PlanarFunction, Point2, QuadratureSpec, RadialFunction};
use rayon::prelude::*;

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

const N_NN: usize = 100_000;
const GRID: (f64, f64, usize) = (0.0, 3.0, 61);

fn grid() -> Vec<f64> {
    CurveGrid::new(GRID.0, GRID.1, GRID.2).unwrap().abscissae()
}

fn nearest_distance() -> Outcome {
    let quad = QuadratureSpec::default();
    let mut ok = true;
    let mut notes = Vec::new();
    let slack = dkw_epsilon(N_NN, 0.01);
    for mu in [1.0, 5.0] {
        let params = ModelParams::isotropic(1.0, mu).map_err(err)?;
        let ecdf = empirical_nn_cdf(&params, 1.0, N_NN, 101).map_err(err)?;
        let ks = ks_distance(&ecdf, |r| nn_cdf(r, &params, &quad).map_or(f64::NAN, |e| e.value));
        ok &= ks <= 0.01;
        ok &= grid().iter().all(|&r| ecdf.eval(r) <= 1.0 - (-2.0 * r).exp() + slack);
        notes.push(format!("mu={mu} KS={ks:.5}"));
    }
    for mu in [1.0, 5.0, 25.0, 100.0] {
        let params = ModelParams::isotropic(1.0, mu).map_err(err)?;
        for r in grid() {
            let f = nn_cdf(r, &params, &quad).map_err(err)?.value;
            if f > 1.0 - (-2.0 * r).exp() + 1e-9 {
                ok = false;
                notes.push(format!("saturation bound broken at mu={mu}, r={r}"));
            }
        }
    }
    notes.push("saturation bound checked for mu in {1,5,25,100}".into());
    Ok((ok, notes.join(", ")))
}

fn palm_nearest_distance() -> Outcome {
    let quad = QuadratureSpec::default();
    let slack = 2.0 * dkw_epsilon(N_NN, 0.01);
    let mut ok = true;
    let mut notes = Vec::new();
    for mu in [1.0, 5.0] {
        let params = ModelParams::isotropic(1.0, mu).map_err(err)?;
        let palm = empirical_nn_cdf_palm(&params, 1.0, N_NN, 202).map_err(err)?;
        let stationary = empirical_nn_cdf(&params, 1.0, N_NN, 203).map_err(err)?;
        let ks = ks_distance(&palm, |r| nn_cdf_palm(r, &params, &quad).map_or(f64::NAN, |e| e.value));
        ok &= ks <= 0.01;
        let mut worst: f64 = f64::INFINITY;
        for r in grid() {
            worst = worst.min(palm.eval(r) - stationary.eval(r));
            let (fp, fs) = (
                nn_cdf_palm(r, &params, &quad).map_err(err)?,
                nn_cdf(r, &params, &quad).map_err(err)?,
            );
            ok &= fp.value >= fs.value - 1e-9;
        }
        ok &= worst >= -slack;
        notes.push(format!("mu={mu} KS={ks:.5} min(Palm-stationary)={worst:.5}"));
    }
    Ok((ok, notes.join(", ")))
}

fn laplace_functions() -> Result<Vec<(&'static str, RadialFunction, f64)>, String> {
    Ok(vec![
        ("gaussian", RadialFunction::gaussian(), 6.0),
        (
            "path-loss",
            RadialFunction::path_loss(1.0, 4.0, 0.1).map_err(err)?,
            50.0,
        ),
    ])
}

fn laplace() -> Outcome {
    let params = ModelParams::isotropic(1.0, 1.0).map_err(err)?;
    let quad = QuadratureSpec::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, f, obs) in laplace_functions()? {
        let planar = PlanarFunction::from_radial(&f);
        let radial = laplace_functional_radial(&f, &params, &quad).map_err(err)?.value;
        let general = laplace_functional(&planar, &params, &quad).map_err(err)?.value;
        let mc = empirical_laplace(&planar, &params, obs, 100_000, 301).map_err(err)?;
        let tol = 10.0 * (quad.abs_tol + quad.rel_tol * radial.abs());
        ok &= mc.within(radial, 3.0) && (radial - general).abs() <= tol;
        notes.push(format!(
            "{name}: L={radial:.6} MC={:.6}±{:.6} |radial-general|={:.1e}",
            mc.mean,
            mc.stderr,
            (radial - general).abs()
        ));
    }
    Ok((ok, notes.join(", ")))
}

fn palm_laplace() -> Outcome {
    let params = ModelParams::isotropic(1.0, 1.0).map_err(err)?;
    let quad = QuadratureSpec::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, f, obs) in laplace_functions()? {
        let planar = PlanarFunction::from_radial(&f);
        let direct = laplace_palm_radial(&f, &params, &quad).map_err(err)?.value;
        let product = laplace_functional(&planar, &params, &quad).map_err(err)?.value
            * typical_line_factor(&planar, &params, &quad).map_err(err)?.value;
        let rel = ((direct - product) / direct).abs();
        let mc = empirical_laplace_palm(&planar, &params, obs, 100_000, 401).map_err(err)?;
        ok &= rel < 1e-8 && mc.within(direct, 3.0);
        notes.push(format!(
            "{name}: Palm L={direct:.6} rel={rel:.1e} MC={:.6}±{:.6}",
            mc.mean, mc.stderr
        ));
    }
    Ok((ok, notes.join(", ")))
}

fn facets() -> Outcome {
    let params = ModelParams::isotropic(1.0, 1.0).map_err(err)?;
    let est = empirical_facet_densities(&params, 10.0, 1000, 501).map_err(err)?;
    let target = facet_densities(&params);
    let close = |e: f64, t: f64| ((e - t) / t).abs() <= 0.03;
    let ok = close(est.vertices.mean, target.vertices)
        && close(est.edges.mean, target.edges)
        && close(est.cells.mean, target.cells)
        && est.euler.within(0.0, 3.0);
    Ok((
        ok,
        format!(
            "({:.4}, {:.4}, {:.4}) vs ({}, {}, {}), Euler {:.4}±{:.4}",
            est.vertices.mean,
            est.edges.mean,
            est.cells.mean,
            target.vertices,
            target.edges,
            target.cells,
            est.euler.mean,
            est.euler.stderr
        ),
    ))
}

fn density() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for lambda in [0.5, 1.0, 2.0] {
        for mu in [0.5, 1.0, 2.0] {
            let params = ModelParams::isotropic(lambda, mu).map_err(err)?;
            let est = empirical_intensity(&params, 3.0, 10_000, 601).map_err(err)?;
            ok &= est.within(lambda * mu, 3.0);
            worst = worst.max((est.mean - lambda * mu).abs() / est.stderr);
        }
    }
    Ok((
        ok,
        format!("largest deviation {worst:.2} standard errors over 9 parameter pairs"),
    ))
}

fn typical_cell() -> Outcome {
    let params = ModelParams::isotropic(1.0, 100.0).map_err(err)?;
    let law = empirical_cell_law(&params, 10_000, 3, 701).map_err(err)?;
    let ks_plus = ks_distance(&law.s_plus, |l| cell_half_length_cdf(l, 1.0));
    let ks_len = ks_distance(&law.length, |l| cell_length_cdf(l, 1.0));
    // Reported only: the limit law without the independence assumption.
    let quad = QuadratureSpec::default();
    let ks_exact = ks_distance(&law.length, |l| {
        cell_length_cdf_exact(l, 1.0, &quad).map_or(f64::NAN, |e| e.value)
    });
    let widths = width_sweep(&params, &[10.0, 100.0, 1000.0], 500, 3, 702).map_err(err)?;
    let decreasing = widths.windows(2).all(|w| w[1].mean < w[0].mean);
    let ok = ks_plus <= 0.02 && ks_len <= 0.02 && law.mean_length.within(1.0, 3.0) && decreasing;
    let means: Vec<String> = widths.iter().map(|w| format!("{:.5}", w.mean)).collect();
    Ok((
        ok,
        format!(
            "KS(S+)={ks_plus:.4} KS(|S|)={ks_len:.4} [vs dependent-halves law {ks_exact:.4}] mean |S|={:.4}±{:.4} widths [{}]",
            law.mean_length.mean,
            law.mean_length.stderr,
            means.join(", ")
        ),
    ))
}

fn quadratic_position() -> Outcome {
    let params = ModelParams::isotropic(1.0, 1.0).map_err(err)?;
    let counts: Vec<usize> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let real = sample_stationary(&params, 5.0, 2.0, SeedSpec::new(801, i)).map_err(err)?;
            gqp_census(&real).map_err(err)
        })
        .collect::<Result<_, _>>()?;
    let total: usize = counts.iter().sum();
    let square = [
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
        Point2::new(-1.0, 0.0),
        Point2::new(0.0, -1.0),
    ];
    let fixture = census_of(&square).map_err(err)?;
    Ok((
        total == 0 && fixture >= 1,
        format!("{total} cocircular quadruples sampled, fixture reports {fixture}"),
    ))
}

fn stationarity() -> Outcome {
    let params = ModelParams::isotropic(1.0, 1.0).map_err(err)?;
    let check = stationarity_check(&params, Point2::new(2.0, 0.0), 1.0, 10_000, 901).map_err(err)?;
    Ok((
        check.test.p_value >= 0.01,
        format!("D={:.4} p={:.3}", check.test.statistic, check.test.p_value),
    ))
}

fn config_for(experiment: Experiment, dir: &Path) -> Result<plcp_cli::ExperimentConfig, String> {
    let mut raw = RawConfig::default();
    raw.set("experiment", experiment.as_str()).map_err(err)?;
    raw.set("seed", "1001").map_err(err)?;
    raw.set("n", "200").map_err(err)?;
    if experiment == Experiment::TypicalCell {
        raw.set("mu", "100").map_err(err)?;
        raw.set("sweep_n", "20").map_err(err)?;
    }
    let mut config = raw.resolve().map_err(err)?;
    config.output_dir = dir.to_path_buf();
    Ok(config)
}

fn determinism() -> Outcome {
    let first = tempfile::tempdir().map_err(err)?;
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for experiment in Experiment::ALL {
        let dir = first.path().join(experiment.as_str());
        let outcome = run(&config_for(experiment, &dir)?).map_err(err)?;
        for artifact in &outcome.files {
            let again = tempfile::tempdir().map_err(err)?;
            let replayed = replay(artifact, again.path()).map_err(err)?;
            for (a, b) in outcome.files.iter().zip(&replayed.files) {
                compared += 1;
                if fs::read(a).map_err(err)? != fs::read(b).map_err(err)? {
                    mismatches.push(format!("{} replayed from {}", a.display(), artifact.display()));
                }
            }
            if replayed.files.len() != outcome.files.len() {
                mismatches.push(format!("{} produced a different file set", artifact.display()));
            }
        }
    }
    Ok((
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{compared} artifact pairs byte-identical across 8 experiments")
        } else {
            mismatches.join("; ")
        },
    ))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "nearest-distance law",
            budget: Duration::from_secs(120),
            check: nearest_distance,
        },
        Criterion {
            id: 2,
            name: "Palm nearest-distance law",
            budget: Duration::from_secs(120),
            check: palm_nearest_distance,
        },
        Criterion {
            id: 3,
            name: "Laplace functional",
            budget: Duration::from_secs(180),
            check: laplace,
        },
        Criterion {
            id: 4,
            name: "Palm Laplace functional",
            budget: Duration::from_secs(180),
            check: palm_laplace,
        },
        Criterion {
            id: 5,
            name: "facet densities",
            budget: Duration::from_secs(300),
            check: facets,
        },
        Criterion {
            id: 6,
            name: "intensity",
            budget: Duration::from_secs(60),
            check: density,
        },
        Criterion {
            id: 7,
            name: "typical-cell limit",
            budget: Duration::from_secs(600),
            check: typical_cell,
        },
        Criterion {
            id: 8,
            name: "general quadratic position",
            budget: Duration::from_secs(120),
            check: quadratic_position,
        },
        Criterion {
            id: 9,
            name: "stationarity",
            budget: Duration::from_secs(60),
            check: stationarity,
        },
        Criterion {
            id: 10,
            name: "determinism",
            budget: Duration::from_secs(60),
            check: determinism,
        },
    ];
    let mut failures = 0;
    for c in criteria {
        let start = Instant::now();
        let result = (c.check)();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok((pass, detail)) => (pass && elapsed <= c.budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} [{:.1}s of {}s] {}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            detail
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
