use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use plcp_cli::config::{Experiment, RawConfig};
use plcp_cli::run::{exit, replay, run, Outcome, RunError};

#[derive(Parser)]
#[command(
    name = "plcp",
    version,
    about = "Simulation and analytics for Cox processes on Poisson lines",
    after_help = "Experiments: sample, nn-cdf, nn-cdf-palm, laplace, facets, typical-cell, gqp, render\n\n\
                  Run one with `plcp <experiment> [--config FILE] [--key value ...]`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Re-run the experiment recorded in an artifact.
    Replay {
        artifact: PathBuf,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
    #[command(external_subcommand)]
    Experiment(Vec<String>),
}

fn experiment_config(args: &[String]) -> Result<plcp_cli::ExperimentConfig, RunError> {
    let (name, rest) = args.split_first().expect("clap passes the subcommand name");
    let mut overrides = Vec::new();
    let mut config_file = None;
    let mut it = rest.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| usage(format!("unexpected argument `{arg}`")))?;
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| usage(format!("--{key} needs a value")))?;
                (key.to_string(), v.clone())
            }
        };
        if key == "config" {
            config_file = Some(PathBuf::from(value));
        } else {
            overrides.push((key, value));
        }
    }
    let mut raw = match &config_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    name.parse::<Experiment>()?;
    raw.set("experiment", name)?;
    for (k, v) in &overrides {
        raw.set(k, v)?;
    }
    Ok(raw.resolve()?)
}

fn usage(message: String) -> RunError {
    RunError::Config(plcp_cli::ConfigError::Invalid {
        key: "arguments".into(),
        reason: message,
    })
}

fn report(result: Result<Outcome, RunError>) -> ExitCode {
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            for v in &outcome.violations {
                eprintln!("tolerance violated: {v}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match cli.command {
        Command::Replay { artifact, output_dir } => {
            info!("replaying {}", artifact.display());
            report(replay(&artifact, &output_dir))
        }
        Command::Experiment(args) => report(experiment_config(&args).and_then(|c| {
            info!("running {}", c.experiment);
            run(&c)
        })),
    }
}
