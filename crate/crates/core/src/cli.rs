//! Command-line front end: `generate`, `fit`, `sweep`, `predict`, `modes`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::dynamics::generate_dataset;
use crate::error::{Error, Result};
use crate::estimators::{
    eval_singular_function, extract_modes, fit_okr, fit_sldmd, predict_flow, singular_triples, Method, Side,
};
use crate::io;
use crate::operator::GramPack;
use crate::sweep::run_lambda_sweep;
use crate::trajectory::{QuadratureRule, Trajectory};

#[derive(Debug, Parser)]
#[command(name = "liouville-dmd", version, about = "Occupation-kernel DMD and regression")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (flat TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long = "mu-d", global = true)]
    pub mu_d: Option<f64>,
    #[arg(long = "mu-r", global = true)]
    pub mu_r: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Relative singular-value cutoff for pseudoinverses.
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,
    #[arg(long, global = true, value_parser = parse_quad)]
    pub quad: Option<QuadratureRule>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_quad(s: &str) -> std::result::Result<QuadratureRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a trajectory dataset (manifest + CSVs) from the configured system.
    Generate {
        #[arg(long)]
        noise_std: Option<f64>,
    },
    /// Fit an SLDMD or OKR model and write a model file.
    Fit {
        /// Dataset manifest; generated from the config when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
    },
    /// Regularization sweep written as a `.dat` table.
    Sweep {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Integrate a fitted model from an initial state.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated initial state, e.g. `1,0`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x0: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Singular values, modes and singular functions on the evaluation grid.
    Modes {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Number of leading singular triples to tabulate.
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
}

impl GlobalArgs {
    pub fn resolve_config(&self) -> Result<Config> {
        let mut c = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.mu_d {
            c.mu_d = v;
        }
        if let Some(v) = self.mu_r {
            c.mu_r = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.cutoff {
            c.cutoff = Some(v);
        }
        if let Some(v) = self.quad {
            c.quad = v;
        }
        Ok(c)
    }

    fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

fn load_or_generate(data: Option<&Path>, config: &Config) -> Result<Vec<Trajectory>> {
    match data {
        Some(p) => io::read_trajectories(p),
        None => generate_dataset(&config.dataset_spec()?),
    }
}

fn pack_for(data: Option<&Path>, config: &Config) -> Result<GramPack> {
    let (params_d, params_r) = (config.params_d()?, config.params_r()?);
    let trajs = load_or_generate(data, config)?;
    GramPack::assemble(trajs, params_d, params_r, config.quad())
}

/// Executes a parsed command line; messages go to stdout.
pub fn run(cli: Cli) -> Result<()> {
    let mut config = cli.global.resolve_config()?;
    match cli.command {
        Command::Generate { noise_std } => {
            if let Some(v) = noise_std {
                config.noise_std = v;
            }
            let spec = config.dataset_spec()?;
            let trajs = generate_dataset(&spec)?;
            let manifest = io::write_trajectories(&trajs, &cli.global.out_or("dataset"), Some(&spec))?;
            println!("wrote {} trajectories to {}", trajs.len(), manifest.display());
        }
        Command::Fit { data, method } => {
            let pack = pack_for(data.as_deref(), &config)?;
            let model = match method.unwrap_or(config.method) {
                Method::Sldmd => fit_sldmd(&pack, config.cutoff)?,
                Method::Okr => fit_okr(&pack, config.lambda)?,
            };
            let out = cli.global.out_or("model.toml");
            io::save_model(&model, &out)?;
            println!("wrote {} model ({} trajectories) to {}", model.method(), pack.len(), out.display());
        }
        Command::Sweep { data } => {
            let trajs = load_or_generate(data.as_deref(), &config)?;
            let setup = config.sweep_setup()?;
            let rows = run_lambda_sweep(Arc::from(trajs), &setup)?;
            let out = cli.global.out_or("sweep.dat");
            let comments = vec![
                format!(
                    "system={} mu_d={} mu_r={} quad={} noise_std={} seed={} component={}",
                    config.system, config.mu_d, config.mu_r, config.quad, config.noise_std, config.seed, config.component
                ),
            ];
            io::write_dat(&rows, &out, &comments)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::Predict { model, x0, horizon, dt } => {
            let model = io::load_model(&model)?;
            let path = predict_flow(&model, &x0, horizon, dt)?;
            match &cli.global.out {
                Some(out) => {
                    io::write_trajectory_csv(&path, out)?;
                    println!("wrote {} samples to {}", path.len(), out.display());
                }
                None => print!("{}", io::trajectory_csv(&path)),
            }
        }
        Command::Modes { data, count } => {
            let pack = pack_for(data.as_deref(), &config)?;
            let triples = singular_triples(&pack, config.cutoff)?;
            let modes = extract_modes(&pack, config.cutoff)?;
            let out = cli.global.out_or("modes");

            let sigma_rows: Vec<Vec<f64>> = triples
                .iter()
                .enumerate()
                .map(|(i, t)| vec![i as f64, t.sigma])
                .collect();
            io::write_table(&out.join("singular_values.dat"), &["index".into(), "sigma".into()], &sigma_rows)?;

            let n = pack.dim();
            let mode_rows: Vec<Vec<f64>> = (0..modes.ncols())
                .map(|i| std::iter::once(i as f64).chain(modes.column(i).iter().copied()).collect())
                .collect();
            let mut header = vec!["index".to_string()];
            header.extend((1..=n).map(|i| format!("xi{i}")));
            io::write_table(&out.join("modes.dat"), &header, &mode_rows)?;

            let k = count.min(triples.len());
            let grid = config.eval_grid()?;
            let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            header.extend((1..=k).map(|i| format!("phi{i}")));
            header.extend((1..=k).map(|i| format!("psi{i}")));
            let rows = grid
                .points()
                .into_iter()
                .map(|x| {
                    let mut row = x.clone();
                    for side in [Side::Left, Side::Right] {
                        for t in &triples[..k] {
                            row.push(eval_singular_function(&pack, t, side, &x)?);
                        }
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            io::write_table(&out.join("singular_functions.dat"), &header, &rows)?;
            println!("wrote {} singular triples and modes to {}", triples.len(), out.display());
        }
    }
    Ok(())
}
