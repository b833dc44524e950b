//! Gram matrices, pseudoinverses and the finite-rank Liouville representation.
//!
//! For trajectories `γ_1 … γ_M` the range basis is the occupation kernels
//! `r_j = Γ_{γ_j}` and the domain basis is the kernel differences
//! `d_j = K_d(·, γ_j(T_j)) − K_d(·, γ_j(0))`. The Liouville operator
//! restricted to `span d` and projected onto `span r` has matrix
//! `G_r⁺ G_d` in those bases.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelParams};
use crate::trajectory::{endpoint_displacement, weighted_inner, QuadratureSpec, Trajectory};

/// Gram matrices and displacements for one trajectory set.
#[derive(Debug, Clone)]
pub struct GramPack {
    /// Occupation-kernel Gram matrix, `M × M`.
    pub g_r: DMatrix<f64>,
    /// Kernel-difference Gram matrix, `M × M`.
    pub g_d: DMatrix<f64>,
    /// Endpoint displacements, `n × M`.
    pub d: DMatrix<f64>,
    pub quad: QuadratureSpec,
    pub params_d: KernelParams,
    pub params_r: KernelParams,
    trajs: Arc<[Trajectory]>,
}

impl GramPack {
    pub fn assemble(
        trajs: impl Into<Arc<[Trajectory]>>,
        params_d: KernelParams,
        params_r: KernelParams,
        quad: QuadratureSpec,
    ) -> Result<Self> {
        let trajs = trajs.into();
        let g_r = gram_occupation(&trajs, &params_r, quad)?;
        let g_d = gram_kernel_diff(&trajs, &params_d)?;
        let d = displacement_matrix(&trajs)?;
        Ok(Self {
            g_r,
            g_d,
            d,
            quad,
            params_d,
            params_r,
            trajs,
        })
    }

    pub fn trajectories(&self) -> &Arc<[Trajectory]> {
        &self.trajs
    }

    /// Trajectory count `M`.
    pub fn len(&self) -> usize {
        self.trajs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajs.is_empty()
    }

    /// State dimension `n`.
    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// `G_r⁺ G_d`.
    pub fn finite_rank_matrix(&self, rel_cutoff: Option<f64>) -> Result<DMatrix<f64>> {
        finite_rank_matrix(&self.g_r, &self.g_d, rel_cutoff)
    }
}

fn common_dim(trajs: &[Trajectory]) -> Result<usize> {
    let first = trajs
        .first()
        .ok_or_else(|| Error::input("at least one trajectory is required"))?;
    if let Some((j, t)) = trajs.iter().enumerate().find(|(_, t)| t.dim() != first.dim()) {
        return Err(Error::Input(format!(
            "trajectory {j} has dimension {}, expected {}",
            t.dim(),
            first.dim()
        )));
    }
    Ok(first.dim())
}

/// Fills a symmetric matrix from its upper triangle, computing entries in parallel.
fn symmetric_from_upper(m: usize, entry: impl Fn(usize, usize) -> f64 + Sync) -> DMatrix<f64> {
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs.par_iter().map(|&(i, j)| entry(i, j)).collect();
    let mut g = DMatrix::zeros(m, m);
    for (&(i, j), v) in pairs.iter().zip(values) {
        g[(i, j)] = v;
        g[(j, i)] = v;
    }
    g
}

/// `G_r[i][j] = ⟨Γ_{γ_j}, Γ_{γ_i}⟩`.
pub fn gram_occupation<K: Kernel + ?Sized>(
    trajs: &[Trajectory],
    kernel: &K,
    quad: QuadratureSpec,
) -> Result<DMatrix<f64>> {
    common_dim(trajs)?;
    let weights = trajs
        .iter()
        .map(|t| quad.weights(t.times()))
        .collect::<Result<Vec<_>>>()?;
    Ok(symmetric_from_upper(trajs.len(), |i, j| {
        weighted_inner(&weights[i], &trajs[i], &weights[j], &trajs[j], kernel)
    }))
}

/// `G_d[i][j] = ⟨d_j, d_i⟩`, expanded through the reproducing property into
/// four kernel evaluations at trajectory endpoints.
pub fn gram_kernel_diff<K: Kernel + ?Sized>(trajs: &[Trajectory], kernel: &K) -> Result<DMatrix<f64>> {
    common_dim(trajs)?;
    Ok(symmetric_from_upper(trajs.len(), |i, j| {
        let (si, ei) = (trajs[i].start(), trajs[i].end());
        let (sj, ej) = (trajs[j].start(), trajs[j].end());
        kernel.eval_unchecked(ej, ei) - kernel.eval_unchecked(ej, si) - kernel.eval_unchecked(sj, ei)
            + kernel.eval_unchecked(sj, si)
    }))
}

/// `D[i][j] = γ_j(T_j)_i − γ_j(0)_i`.
pub fn displacement_matrix(trajs: &[Trajectory]) -> Result<DMatrix<f64>> {
    let n = common_dim(trajs)?;
    let mut d = DMatrix::zeros(n, trajs.len());
    for (j, t) in trajs.iter().enumerate() {
        d.set_column(j, &DVector::from_vec(endpoint_displacement(t)));
    }
    Ok(d)
}

/// Singular value decomposition `W · diag(Σ) · Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub w: DMatrix<f64>,
    /// Nonincreasing; truncated entries are exactly zero.
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
    /// Number of nonzero entries of `sigma`.
    pub rank: usize,
}

impl SvdResult {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut ws = self.w.clone();
        for (mut col, s) in ws.column_iter_mut().zip(self.sigma.iter()) {
            col *= *s;
        }
        ws * self.v.transpose()
    }
}

/// `ε · max(rows, cols)`, the usual numerical-rank threshold.
pub fn default_rel_cutoff(rows: usize, cols: usize) -> f64 {
    f64::EPSILON * rows.max(cols) as f64
}

/// Moore–Penrose pseudoinverse by truncated SVD.
///
/// Singular values `σ ≤ rel_cutoff · σ_max` are treated as zero. The returned
/// [`SvdResult`] factors the pseudoinverse itself: its `sigma` holds `1/σ_i`
/// for retained values (largest first), `w` holds the input's right singular
/// vectors and `v` its left ones.
pub fn pinv_svd(a: &DMatrix<f64>, rel_cutoff: Option<f64>) -> Result<(DMatrix<f64>, SvdResult)> {
    if a.is_empty() {
        return Err(Error::input("cannot pseudoinvert an empty matrix"));
    }
    if let Some(v) = a.iter().find(|v| !v.is_finite()) {
        return Err(Error::Input(format!("matrix contains non-finite entry {v}")));
    }
    let rel_cutoff = rel_cutoff.unwrap_or_else(|| default_rel_cutoff(a.nrows(), a.ncols()));
    if rel_cutoff.is_nan() || rel_cutoff < 0.0 {
        return Err(Error::Input(format!("rel_cutoff must be ≥ 0, got {rel_cutoff}")));
    }

    let (u, s, v) = if a.is_square() && a == &a.transpose() {
        symmetric_svd(a)
    } else {
        let svd = a.clone().svd(true, true);
        (
            svd.u.expect("left singular vectors requested"),
            svd.singular_values,
            svd.v_t.expect("right singular vectors requested").transpose(),
        )
    };

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let s_max = s[order[0]];
    let threshold = rel_cutoff * s_max;
    let retained: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| s[i] > threshold && s[i] > 0.0)
        .collect();
    let rank = retained.len();

    // Largest 1/σ comes from the smallest retained σ.
    let pinv_order: Vec<usize> = retained
        .iter()
        .rev()
        .chain(order.iter().filter(|&&i| !(s[i] > threshold && s[i] > 0.0)))
        .copied()
        .collect();
    let k = pinv_order.len();
    let mut w = DMatrix::zeros(v.nrows(), k);
    let mut vv = DMatrix::zeros(u.nrows(), k);
    let mut sigma = DVector::zeros(k);
    for (col, &i) in pinv_order.iter().enumerate() {
        w.set_column(col, &v.column(i));
        vv.set_column(col, &u.column(i));
        if col < rank {
            sigma[col] = 1.0 / s[i];
        }
    }
    let result = SvdResult {
        w,
        sigma,
        v: vv,
        rank,
    };
    Ok((result.reconstruct(), result))
}

/// SVD of a symmetric matrix from its eigendecomposition `Q Λ Qᵀ`:
/// `U = Q`, `σ = |λ|`, `V = Q · sign(Λ)`. Both factors share one computed
/// basis, so `U Σ Vᵀ` stays symmetric to working precision.
fn symmetric_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let q = eig.eigenvectors;
    let mut v = q.clone();
    for (mut col, &lambda) in v.column_iter_mut().zip(eig.eigenvalues.iter()) {
        if lambda < 0.0 {
            col.neg_mut();
        }
    }
    (q, eig.eigenvalues.abs(), v)
}

/// `[A_f] = G_r⁺ G_d`.
pub fn finite_rank_matrix(
    g_r: &DMatrix<f64>,
    g_d: &DMatrix<f64>,
    rel_cutoff: Option<f64>,
) -> Result<DMatrix<f64>> {
    if !g_r.is_square() || g_r.shape() != g_d.shape() {
        return Err(Error::Input(format!(
            "G_r {:?} and G_d {:?} must be square of equal size",
            g_r.shape(),
            g_d.shape()
        )));
    }
    let (pinv, _) = pinv_svd(g_r, rel_cutoff)?;
    Ok(pinv * g_d)
}
