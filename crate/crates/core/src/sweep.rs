//! Field-error metric and the regularization sweep comparing OKR against SLDMD.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dynamics::{EvalGrid, OdeSystem};
use crate::error::{check_dim, Error, Result};
use crate::estimators::{fit_okr, fit_sldmd, Model};
use crate::kernel::KernelParams;
use crate::operator::GramPack;
use crate::trajectory::{QuadratureSpec, Trajectory};

/// One line of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    /// Mean absolute error of the OKR model at this `lambda`.
    pub okr_err: f64,
    /// Same metric for SLDMD, identical on every row.
    pub sldmd_err: f64,
}

/// `n` values spaced logarithmically from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && n >= 1) {
        return Err(Error::Input(format!(
            "log grid needs 0 < lo ≤ hi and n ≥ 1 (got {lo}, {hi}, {n})"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect())
}

/// 25 values from `1e−10` to `1e4`.
pub fn default_lambdas() -> Vec<f64> {
    log_space(1e-10, 1e4, 25).expect("valid default grid")
}

fn truth_component(system: &OdeSystem, component: usize, points: &[Vec<f64>]) -> DVector<f64> {
    let mut buf = vec![0.0; system.dim()];
    DVector::from_iterator(
        points.len(),
        points.iter().map(|p| {
            system.eval_into(p, &mut buf);
            buf[component]
        }),
    )
}

fn check_metric_input(dim: usize, system: &OdeSystem, component: usize, grid: &EvalGrid) -> Result<()> {
    check_dim("model vs system", system.dim(), dim)?;
    check_dim("evaluation grid", system.dim(), grid.dim())?;
    if component >= dim {
        return Err(Error::Input(format!(
            "component {component} out of range for dimension {dim}"
        )));
    }
    if grid.is_empty() {
        return Err(Error::input("evaluation grid is empty"));
    }
    Ok(())
}

fn mean_abs(a: &DVector<f64>, b: impl Iterator<Item = f64>) -> f64 {
    let n = a.len() as f64;
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n
}

/// Mean over grid nodes of `|f_c(x) − f̂_c(x)|` (0-based component `c`).
pub fn mean_abs_field_error(model: &Model, system: &OdeSystem, component: usize, grid: &EvalGrid) -> Result<f64> {
    check_metric_input(model.dim(), system, component, grid)?;
    let points = grid.points();
    let truth = truth_component(system, component, &points);
    let fitted = model.eval_many(&points)?;
    Ok(mean_abs(&truth, fitted.row(component).iter().copied()))
}

/// Error of the model `f̂ ≡ 0`, the plateau OKR approaches as `λ → ∞`.
pub fn zero_model_error(system: &OdeSystem, component: usize, grid: &EvalGrid) -> Result<f64> {
    check_metric_input(system.dim(), system, component, grid)?;
    let truth = truth_component(system, component, &grid.points());
    Ok(truth.iter().map(|v| v.abs()).sum::<f64>() / truth.len() as f64)
}

/// Everything a sweep needs besides the data.
#[derive(Debug, Clone)]
pub struct SweepSetup {
    pub system: OdeSystem,
    pub params_d: KernelParams,
    pub params_r: KernelParams,
    pub quad: QuadratureSpec,
    pub lambdas: Vec<f64>,
    pub grid: EvalGrid,
    /// 0-based field component scored by the metric.
    pub component: usize,
    pub rel_cutoff: Option<f64>,
}

impl SweepSetup {
    /// Duffing second component on the 61 × 61 grid, `μ_d = μ_r = 5`, Simpson.
    pub fn duffing_default() -> Self {
        Self {
            system: OdeSystem::duffing(),
            params_d: KernelParams::default(),
            params_r: KernelParams::default(),
            quad: QuadratureSpec::SIMPSON,
            lambdas: default_lambdas(),
            grid: EvalGrid::default_eval(),
            component: 1,
            rel_cutoff: None,
        }
    }
}

/// Fits SLDMD once and OKR per `λ` from a single Gram pack, scoring each
/// against the true field. Rows follow the order of `setup.lambdas`.
pub fn run_lambda_sweep(dataset: impl Into<Arc<[Trajectory]>>, setup: &SweepSetup) -> Result<Vec<SweepRow>> {
    if setup.lambdas.is_empty() {
        return Err(Error::input("lambda list is empty"));
    }
    if let Some(l) = setup.lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::Input(format!("sweep lambdas must be positive, got {l}")));
    }
    let pack = GramPack::assemble(dataset, setup.params_d, setup.params_r, setup.quad)?;
    check_metric_input(pack.dim(), &setup.system, setup.component, &setup.grid)?;

    let points = setup.grid.points();
    let truth = truth_component(&setup.system, setup.component, &points);
    let sldmd = fit_sldmd(&pack, setup.rel_cutoff)?;
    let features = sldmd.basis().feature_matrix(&points)?;
    let score = |model: &Model| -> f64 {
        let row = model.coefficients().row(setup.component) * &features;
        mean_abs(&truth, row.iter().copied())
    };
    let sldmd_err = score(&sldmd);

    setup
        .lambdas
        .par_iter()
        .map(|&lambda| {
            let model = fit_okr(&pack, lambda).map_err(|e| e.context(format!("lambda = {lambda:e}")))?;
            Ok(SweepRow {
                lambda,
                okr_err: score(&model),
                sldmd_err,
            })
        })
        .collect()
}

/// OKR coefficient gap `‖A_okr(λ) − A_sldmd‖_F / ‖A_sldmd‖_F` for each `λ`.
pub fn okr_gap(pack: &GramPack, lambdas: &[f64], rel_cutoff: Option<f64>) -> Result<Vec<f64>> {
    let sldmd = fit_sldmd(pack, rel_cutoff)?;
    let base: &DMatrix<f64> = sldmd.coefficients();
    lambdas
        .iter()
        .map(|&l| {
            let okr = fit_okr(pack, l)?;
            Ok((okr.coefficients() - base).norm() / base.norm())
        })
        .collect()
}
