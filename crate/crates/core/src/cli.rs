//! Command-line front end: simulate, decompose, experiment and evaluate.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evaluation::{accuracy, run_experiment, Method};
use crate::io::{
    read_matrix, write_events, write_matrix, write_overlays, write_report, write_samples,
    NOT_APPLICABLE,
};
use crate::simulator::generate;
use crate::solver::{Decomposition, Remainder, SolverTrace};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "tmdecomp", version, about = "Traffic matrix decomposition toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run configuration; defaults are used for anything missing.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the scenario seed and the experiment base seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides io.out_dir).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Only report errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labelled traffic matrix.
    Simulate,
    /// Decompose a traffic matrix read from CSV.
    Decompose {
        /// Headerless CSV, one row per period, one column per flow.
        #[arg(long, short, value_name = "PATH")]
        input: PathBuf,
        /// pca[:K], pcp, spcp or spcp_mrc.
        #[arg(long, default_value = "spcp_mrc")]
        method: Method,
    },
    /// Run the multi-sample accuracy battery.
    Experiment {
        /// Restrict the battery to these methods (repeatable).
        #[arg(long)]
        method: Vec<Method>,
        /// Maximum number of worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides experiment.n_samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Score a decomposition against simulated ground truth.
    Evaluate {
        /// Directory holding A.csv, E.csv and N.csv.
        #[arg(long, value_name = "DIR")]
        truth: PathBuf,
        /// Directory holding A_hat.csv plus E_hat.csv/N_hat.csv or R_hat.csv.
        #[arg(long, value_name = "DIR")]
        estimate: PathBuf,
    },
}

fn resolve_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.set_seed(seed);
    }
    if let Some(out) = &common.out {
        config.io.out_dir = out.clone();
    }
    Ok(config)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs one parsed invocation.
pub fn run(cli: Cli) -> Result<()> {
    let config = resolve_config(&cli.common)?;
    let quiet = cli.common.quiet;
    match cli.command {
        Command::Simulate => cmd_simulate(&config, quiet),
        Command::Decompose { input, method } => cmd_decompose(&config, &input, method, quiet),
        Command::Experiment {
            method,
            jobs,
            samples,
        } => {
            let mut config = config;
            if !method.is_empty() {
                config.experiment.methods = method;
            }
            if jobs.is_some() {
                config.experiment.jobs = jobs;
            }
            if let Some(n) = samples {
                config.experiment.n_samples = n;
            }
            config.validate()?;
            cmd_experiment(&config, quiet)
        }
        Command::Evaluate { truth, estimate } => {
            cmd_evaluate(&truth, &estimate, &config.io.out_dir, quiet)
        }
    }
}

/// Writes `X.csv`, `A.csv`, `E.csv`, `N.csv`, `events.csv` and the resolved `config.toml`.
pub fn cmd_simulate(config: &RunConfig, quiet: bool) -> Result<()> {
    let dir = &config.io.out_dir;
    let truth = generate(&config.scenario)?;
    prepare_dir(dir)?;
    write_matrix(&dir.join("X.csv"), &truth.total)?;
    write_matrix(&dir.join("A.csv"), &truth.deterministic)?;
    write_matrix(&dir.join("E.csv"), &truth.anomaly)?;
    write_matrix(&dir.join("N.csv"), &truth.noise)?;
    write_events(&dir.join("events.csv"), &truth.events)?;
    write_text(&dir.join("config.toml"), &config.to_toml())?;
    if !quiet {
        println!(
            "{}: {}x{} matrix, {} events, seed {} -> {}",
            config.scenario.name(),
            truth.total.nrows(),
            truth.total.ncols(),
            truth.events.len(),
            config.scenario.seed,
            dir.display()
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct DecomposeSummary {
    method: String,
    input: String,
    rows: usize,
    cols: usize,
    lambda: Option<f64>,
    mu0: Option<f64>,
    mu_floor: Option<f64>,
    iterations: Option<usize>,
    converged: Option<bool>,
    final_residual: f64,
}

fn write_trace(path: &Path, trace: &SolverTrace) -> Result<()> {
    let mut text = String::from("iteration,objective,residual,mu,rank,nnz\n");
    for r in &trace.records {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.iteration, r.objective, r.residual, r.mu, r.rank, r.nnz
        ));
    }
    write_text(path, &text)
}

/// Writes the estimated components, `trace.csv` for iterative methods and `summary.toml`.
pub fn cmd_decompose(config: &RunConfig, input: &Path, method: Method, quiet: bool) -> Result<()> {
    let x = read_matrix(input)?;
    let (estimate, trace) = method.run(&x, &config.solver)?;
    let dir = &config.io.out_dir;
    prepare_dir(dir)?;
    write_matrix(&dir.join("A_hat.csv"), &estimate.deterministic)?;
    match &estimate.remainder {
        Remainder::AnomalyNoise { anomaly, noise } => {
            write_matrix(&dir.join("E_hat.csv"), anomaly)?;
            write_matrix(&dir.join("N_hat.csv"), noise)?;
        }
        Remainder::Anomaly(anomaly) => write_matrix(&dir.join("E_hat.csv"), anomaly)?,
        Remainder::Residual(r) => write_matrix(&dir.join("R_hat.csv"), r)?,
    }
    if let Some(t) = &trace {
        write_trace(&dir.join("trace.csv"), t)?;
    }
    let x_norm = x.norm();
    let misfit = (&x - estimate.total()).norm();
    let summary = DecomposeSummary {
        method: method.to_string(),
        input: input.display().to_string(),
        rows: x.nrows(),
        cols: x.ncols(),
        lambda: trace.as_ref().map(|t| t.lambda),
        mu0: trace.as_ref().map(|t| t.mu0),
        mu_floor: trace.as_ref().map(|t| t.mu_floor),
        iterations: trace.as_ref().map(|t| t.iterations()),
        converged: trace.as_ref().map(|t| t.converged),
        final_residual: if x_norm > 0.0 { misfit / x_norm } else { misfit },
    };
    let text = toml::to_string(&summary).expect("summary serializes");
    write_text(&dir.join("summary.toml"), &text)?;
    write_text(&dir.join("config.toml"), &config.to_toml())?;
    if !quiet {
        print!("{text}");
    }
    Ok(())
}

/// Writes `report.csv`, `samples.csv`, `overlays.csv` and the resolved `config.toml`.
pub fn cmd_experiment(config: &RunConfig, quiet: bool) -> Result<()> {
    let experiment = config.experiment();
    let report = run_experiment(&experiment)?;
    let dir = &config.io.out_dir;
    prepare_dir(dir)?;
    let names: Vec<String> = experiment.scenarios.iter().map(|s| s.name()).collect();
    write_report(&dir.join("report.csv"), &report)?;
    write_samples(&dir.join("samples.csv"), &report, &names)?;
    write_overlays(&dir.join("overlays.csv"), &report)?;
    write_text(&dir.join("config.toml"), &config.to_toml())?;
    if !quiet {
        for r in &report.rows {
            let fmt = |s: Option<crate::evaluation::Summary>| {
                s.map(|s| format!("{:.4}", s.mean)).unwrap_or_else(|| "-".into())
            };
            let n = if r.noise_not_applicable() {
                NOT_APPLICABLE.to_string()
            } else {
                fmt(r.noise)
            };
            println!(
                "{:<28} {:<9} A {} E {} N {} ({} samples, {} failed)",
                r.scenario,
                r.method.to_string(),
                fmt(r.deterministic),
                fmt(r.anomaly_error),
                n,
                r.n_samples,
                r.n_failed
            );
        }
    }
    Ok(())
}

/// Reads an estimate directory written by `decompose`.
pub fn read_estimate(dir: &Path) -> Result<Decomposition> {
    let deterministic = read_matrix(&dir.join("A_hat.csv"))?;
    let residual = dir.join("R_hat.csv");
    let remainder = if residual.exists() {
        Remainder::Residual(read_matrix(&residual)?)
    } else {
        let anomaly = read_matrix(&dir.join("E_hat.csv"))?;
        let noise = dir.join("N_hat.csv");
        if noise.exists() {
            Remainder::AnomalyNoise {
                anomaly,
                noise: read_matrix(&noise)?,
            }
        } else {
            Remainder::Anomaly(anomaly)
        }
    };
    Ok(Decomposition {
        deterministic,
        remainder,
    })
}

/// Writes `accuracy.csv` with one row per component.
pub fn cmd_evaluate(truth: &Path, estimate: &Path, out: &Path, quiet: bool) -> Result<()> {
    let a = read_matrix(&truth.join("A.csv"))?;
    let e = read_matrix(&truth.join("E.csv"))?;
    let n = read_matrix(&truth.join("N.csv"))?;
    let est = read_estimate(estimate)?;
    let acc = accuracy(&a, &e, &n, &est)?;
    let noise = acc
        .noise
        .map(|v| format!("{v}"))
        .unwrap_or_else(|| NOT_APPLICABLE.into());
    let text = format!(
        "component,accuracy\nA,{}\nE,{}\nN,{}\n",
        acc.deterministic, acc.anomaly, noise
    );
    prepare_dir(out)?;
    write_text(&out.join("accuracy.csv"), &text)?;
    if !quiet {
        print!("{text}");
    }
    Ok(())
}
