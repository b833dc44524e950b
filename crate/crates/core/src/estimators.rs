//! Vector-field models built on occupation kernels.
//!
//! Both estimators produce `f̂(x) = A r(x)` where `r(x)_j = Γ_{γ_j}(x)`:
//!
//! * SLDMD takes `A = D G_r⁺`, the model induced by the singular value
//!   decomposition of the finite-rank Liouville representation.
//! * OKR solves the regularized system `A (G_r + λI) = D`.
//!
//! With `λ = 0` and nonsingular `G_r` the two coincide.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_rk4, OdeSystem};
use crate::error::{check_dim, Error, Result};
use crate::kernel::{Kernel, KernelParams};
use crate::operator::{pinv_svd, GramPack, SvdResult};
use crate::trajectory::{weighted_eval, QuadratureSpec, Trajectory};

/// The occupation kernels `r_1 … r_M` of a trajectory set, with cached
/// quadrature weights.
#[derive(Debug, Clone)]
pub struct OccupationBasis {
    trajs: Arc<[Trajectory]>,
    weights: Arc<[Vec<f64>]>,
    params: KernelParams,
    quad: QuadratureSpec,
}

impl OccupationBasis {
    pub fn new(trajs: Arc<[Trajectory]>, params: KernelParams, quad: QuadratureSpec) -> Result<Self> {
        let weights = trajs
            .iter()
            .map(|t| quad.weights(t.times()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            trajs,
            weights: weights.into(),
            params,
            quad,
        })
    }

    pub fn trajectories(&self) -> &Arc<[Trajectory]> {
        &self.trajs
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn quad(&self) -> QuadratureSpec {
        self.quad
    }

    pub fn len(&self) -> usize {
        self.trajs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.trajs.first().map_or(0, Trajectory::dim)
    }

    /// `r(x)`, length `M`.
    pub fn features(&self, x: &[f64]) -> Result<DVector<f64>> {
        check_dim("model argument", self.dim(), x.len())?;
        Ok(self.features_unchecked(x))
    }

    fn features_unchecked(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.trajs
                .iter()
                .zip(self.weights.iter())
                .map(|(t, w)| weighted_eval(w, t, x, &self.params)),
        )
    }

    /// `M × P` matrix whose column `p` is `r(points[p])`.
    pub fn feature_matrix(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        for p in points {
            check_dim("model argument", self.dim(), p.len())?;
        }
        let cols: Vec<DVector<f64>> = points.par_iter().map(|p| self.features_unchecked(p)).collect();
        Ok(if cols.is_empty() {
            DMatrix::zeros(self.len(), 0)
        } else {
            DMatrix::from_columns(&cols)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sldmd,
    Okr,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sldmd" => Ok(Self::Sldmd),
            "okr" => Ok(Self::Okr),
            other => Err(Error::Input(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Sldmd => "sldmd",
            Self::Okr => "okr",
        })
    }
}

/// Fitted model `f̂(x) = A r(x)`.
#[derive(Debug, Clone)]
pub struct Model {
    a: DMatrix<f64>,
    basis: OccupationBasis,
    method: Method,
    lambda: f64,
}

impl Model {
    pub fn new(a: DMatrix<f64>, basis: OccupationBasis, method: Method, lambda: f64) -> Result<Self> {
        if a.ncols() != basis.len() || a.nrows() != basis.dim() {
            return Err(Error::Input(format!(
                "coefficient matrix is {}×{}, expected {}×{}",
                a.nrows(),
                a.ncols(),
                basis.dim(),
                basis.len()
            )));
        }
        match method {
            Method::Sldmd if lambda != 0.0 => {
                return Err(Error::input("sldmd models carry lambda = 0"));
            }
            _ if !(lambda >= 0.0 && lambda.is_finite()) => {
                return Err(Error::Input(format!("lambda must be ≥ 0, got {lambda}")));
            }
            _ => {}
        }
        Ok(Self {
            a,
            basis,
            method,
            lambda,
        })
    }

    /// `n × M` coefficients.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn basis(&self) -> &OccupationBasis {
        &self.basis
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `f̂(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.basis.features(x)?;
        Ok((&self.a * r).as_slice().to_vec())
    }

    /// `f̂` at many points at once, as an `n × P` matrix.
    pub fn eval_many(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        Ok(&self.a * self.basis.feature_matrix(points)?)
    }

    /// The fitted field as an [`OdeSystem`].
    pub fn as_system(&self) -> OdeSystem {
        let model = self.clone();
        OdeSystem::new(format!("{}-model", self.method), self.dim(), move |x, out| {
            let r = model.basis.features_unchecked(x);
            out.copy_from_slice((&model.a * r).as_slice());
        })
    }
}

/// `A = D G_r⁺`, assembled in factored form `ξ Σ Wᵀ` with modes `ξ = D V`.
///
/// The factored product avoids forming `G_r⁺` explicitly, whose entries are
/// huge and cancel when `G_r` is ill-conditioned.
pub fn fit_sldmd(pack: &GramPack, rel_cutoff: Option<f64>) -> Result<Model> {
    let (_, svd) = pinv_svd(&pack.g_r, rel_cutoff)?;
    let a = modes_times_sigma(&pack.d, &svd) * svd.w.transpose();
    let basis = OccupationBasis::new(pack.trajectories().clone(), pack.params_r, pack.quad)?;
    Model::new(a, basis, Method::Sldmd, 0.0)
}

/// Solves `A (G_r + λI) = D`.
///
/// Uses a Cholesky factorization, falling back to LU when quadrature error
/// leaves `G_r + λI` slightly indefinite. `λ = 0` is accepted only for a
/// numerically nonsingular `G_r`.
pub fn fit_okr(pack: &GramPack, lambda: f64) -> Result<Model> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Input(format!("lambda must be ≥ 0, got {lambda}")));
    }
    let m = pack.len();
    if lambda == 0.0 {
        let (_, svd) = pinv_svd(&pack.g_r, None)?;
        if svd.rank < m {
            return Err(Error::Rank(format!(
                "G_r has numerical rank {} < {m}; use fit_sldmd for lambda = 0",
                svd.rank
            )));
        }
    }
    let mut system = pack.g_r.clone();
    for i in 0..m {
        system[(i, i)] += lambda;
    }
    let rhs = pack.d.transpose();
    let at = match system.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => system.lu().solve(&rhs).ok_or_else(|| {
            Error::Rank(format!("G_r + λI is singular at lambda = {lambda:e}"))
        })?,
    };
    if at.iter().any(|v| !v.is_finite()) {
        return Err(Error::Rank(format!(
            "OKR solve produced non-finite coefficients at lambda = {lambda:e}"
        )));
    }
    let basis = OccupationBasis::new(pack.trajectories().clone(), pack.params_r, pack.quad)?;
    Model::new(at.transpose(), basis, Method::Okr, lambda)
}

/// `f̂(x) = A r(x)`.
pub fn eval_model(model: &Model, x: &[f64]) -> Result<Vec<f64>> {
    model.eval(x)
}

/// One singular value of the finite-rank operator with the coefficient
/// vectors of its singular functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriple {
    pub sigma: f64,
    /// Left singular function `φ = vᵀ d`.
    pub v: DVector<f64>,
    /// Right singular function `ψ = wᵀ r`.
    pub w: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn triples_from(svd: &SvdResult) -> Vec<SingularTriple> {
    (0..svd.sigma.len())
        .map(|i| SingularTriple {
            sigma: svd.sigma[i],
            v: svd.v.column(i).into_owned(),
            w: svd.w.column(i).into_owned(),
        })
        .collect()
}

/// Singular triples from the SVD `W Σ Vᵀ` of `G_r⁺`, largest `σ` first.
pub fn singular_triples(pack: &GramPack, rel_cutoff: Option<f64>) -> Result<Vec<SingularTriple>> {
    let (_, svd) = pinv_svd(&pack.g_r, rel_cutoff)?;
    Ok(triples_from(&svd))
}

/// Evaluates `φ(x) = Σ_j v_j d_j(x)` or `ψ(x) = Σ_j w_j Γ_{γ_j}(x)`.
pub fn eval_singular_function(
    pack: &GramPack,
    triple: &SingularTriple,
    side: Side,
    x: &[f64],
) -> Result<f64> {
    check_dim("singular function argument", pack.dim(), x.len())?;
    let trajs = pack.trajectories();
    match side {
        Side::Left => {
            check_dim("left coefficient vector", trajs.len(), triple.v.len())?;
            trajs.iter().zip(triple.v.iter()).try_fold(0.0, |acc, (t, c)| {
                Ok(acc + c * pack.params_d.eval_diff(x, t.start(), t.end())?)
            })
        }
        Side::Right => {
            check_dim("right coefficient vector", trajs.len(), triple.w.len())?;
            let mut acc = 0.0;
            for (t, c) in trajs.iter().zip(triple.w.iter()) {
                let w = pack.quad.weights(t.times())?;
                acc += c * weighted_eval(&w, t, x, &pack.params_r);
            }
            Ok(acc)
        }
    }
}

/// Modes `ξ = D V`, so that `f̂(x) = ξ Σ Wᵀ r(x)`.
pub fn extract_modes(pack: &GramPack, rel_cutoff: Option<f64>) -> Result<DMatrix<f64>> {
    let (_, svd) = pinv_svd(&pack.g_r, rel_cutoff)?;
    Ok(&pack.d * &svd.v)
}

fn modes_times_sigma(d: &DMatrix<f64>, svd: &SvdResult) -> DMatrix<f64> {
    let mut xi = d * &svd.v;
    for (mut col, s) in xi.column_iter_mut().zip(svd.sigma.iter()) {
        col *= *s;
    }
    xi
}

/// Integrates `ẋ = f̂(x)` from `x0` with fixed-step RK4.
pub fn predict_flow(model: &Model, x0: &[f64], horizon: f64, dt: f64) -> Result<Trajectory> {
    check_dim("initial condition", model.dim(), x0.len())?;
    integrate_rk4(&model.as_system(), x0, horizon, dt)
}
