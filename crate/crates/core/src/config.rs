//! Flat key/value run configuration (TOML).
//!
//! ```toml
//! system = "duffing"
//! grid_min = [-3.0, -3.0]
//! grid_max = [3.0, 3.0]
//! grid_counts = [13, 13]
//! duration = 1.0
//! dt = 0.01
//! noise_std = 0.001
//! seed = 2023
//! mu_d = 5.0
//! mu_r = 5.0
//! quad = "simpson"
//! lambda_min = 1e-10
//! lambda_max = 1e4
//! lambda_count = 25
//! ```
//!
//! Missing keys take the Duffing experiment defaults.

use std::path::Path;

use serde::Deserialize;

use crate::dynamics::{DatasetSpec, EvalGrid, OdeSystem};
use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::kernel::KernelParams;
use crate::sweep::{log_space, SweepSetup};
use crate::trajectory::{QuadratureRule, QuadratureSpec};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub system: String,
    pub grid_min: Vec<f64>,
    pub grid_max: Vec<f64>,
    pub grid_counts: Vec<usize>,
    pub duration: f64,
    pub dt: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub mu_d: f64,
    pub mu_r: f64,
    pub quad: QuadratureRule,
    /// Relative singular-value cutoff; `None` means `ε · M`.
    pub cutoff: Option<f64>,
    pub method: Method,
    pub lambda: f64,
    /// Explicit sweep values; overrides the log grid below.
    pub lambdas: Option<Vec<f64>>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub eval_min: Vec<f64>,
    pub eval_max: Vec<f64>,
    pub eval_counts: Vec<usize>,
    /// 0-based component scored by the sweep metric.
    pub component: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            system: "duffing".into(),
            grid_min: vec![-3.0, -3.0],
            grid_max: vec![3.0, 3.0],
            grid_counts: vec![13, 13],
            duration: 1.0,
            dt: 0.01,
            noise_std: 0.0,
            seed: 0,
            mu_d: 5.0,
            mu_r: 5.0,
            quad: QuadratureRule::Simpson,
            cutoff: None,
            method: Method::Sldmd,
            lambda: 1e-2,
            lambdas: None,
            lambda_min: 1e-10,
            lambda_max: 1e4,
            lambda_count: 25,
            eval_min: vec![-3.0, -3.0],
            eval_max: vec![3.0, 3.0],
            eval_counts: vec![61, 61],
            component: 1,
        }
    }
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn dataset_spec(&self) -> Result<DatasetSpec> {
        Ok(DatasetSpec {
            system: OdeSystem::by_name(&self.system)?,
            grid: EvalGrid::new(self.grid_min.clone(), self.grid_max.clone(), self.grid_counts.clone())?,
            duration: self.duration,
            dt: self.dt,
            noise_std: self.noise_std,
            seed: self.seed,
        })
    }

    pub fn params_d(&self) -> Result<KernelParams> {
        KernelParams::new(self.mu_d)
    }

    pub fn params_r(&self) -> Result<KernelParams> {
        KernelParams::new(self.mu_r)
    }

    pub fn quad(&self) -> QuadratureSpec {
        QuadratureSpec { rule: self.quad }
    }

    pub fn eval_grid(&self) -> Result<EvalGrid> {
        EvalGrid::new(self.eval_min.clone(), self.eval_max.clone(), self.eval_counts.clone())
    }

    pub fn sweep_lambdas(&self) -> Result<Vec<f64>> {
        match &self.lambdas {
            Some(l) => Ok(l.clone()),
            None => log_space(self.lambda_min, self.lambda_max, self.lambda_count),
        }
    }

    pub fn sweep_setup(&self) -> Result<SweepSetup> {
        Ok(SweepSetup {
            system: OdeSystem::by_name(&self.system)?,
            params_d: self.params_d()?,
            params_r: self.params_r()?,
            quad: self.quad(),
            lambdas: self.sweep_lambdas()?,
            grid: self.eval_grid()?,
            component: self.component,
            rel_cutoff: self.cutoff,
        })
    }
}
