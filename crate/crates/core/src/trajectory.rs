//! Sampled trajectories and occupation-kernel quadrature.
//!
//! The occupation kernel of a trajectory `γ : [0, T] → ℝⁿ` is the function
//! `Γ_γ(x) = ∫₀ᵀ K(x, γ(t)) dt`; inner products of two occupation kernels are
//! the double integral `∫∫ K(γ_i(τ), γ_j(t)) dt dτ`. Both are approximated
//! with quadrature weights on the trajectory's own sample times.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kernel::Kernel;

/// Relative tolerance on step-size deviation for a grid to count as uniform.
pub const UNIFORM_GRID_RTOL: f64 = 1e-9;

/// Time-stamped samples `x_0 … x_K` of one solution, `K + 1 ≥ 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    /// Row-major `(K + 1) × n`.
    states: Vec<f64>,
    dim: usize,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>) -> Result<Self> {
        let dim = states.first().map_or(0, Vec::len);
        if let Some((k, s)) = states.iter().enumerate().find(|(_, s)| s.len() != dim) {
            return Err(Error::Input(format!(
                "state {k} has dimension {}, expected {dim}",
                s.len()
            )));
        }
        Self::from_flat(times, dim, states.into_iter().flatten().collect())
    }

    /// Builds a trajectory from row-major state storage.
    pub fn from_flat(times: Vec<f64>, dim: usize, states: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("trajectory state dimension must be ≥ 1"));
        }
        if times.len() < 3 {
            return Err(Error::Input(format!(
                "trajectory needs at least 3 samples, got {}",
                times.len()
            )));
        }
        if states.len() != times.len() * dim {
            return Err(Error::Input(format!(
                "{} state values do not fill {} samples of dimension {dim}",
                states.len(),
                times.len()
            )));
        }
        if let Some(v) = times.iter().chain(&states).find(|v| !v.is_finite()) {
            return Err(Error::Input(format!("trajectory contains non-finite value {v}")));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Input(format!(
                "sample times must be strictly increasing (t[{}] = {} ≥ t[{}] = {})",
                k,
                times[k],
                k + 1,
                times[k + 1]
            )));
        }
        Ok(Self { times, states, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples `K + 1`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.dim)
    }

    pub fn start(&self) -> &[f64] {
        self.state(0)
    }

    pub fn end(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// `T = t_K − t_0`.
    pub fn duration(&self) -> f64 {
        self.times[self.len() - 1] - self.times[0]
    }

    /// Returns a copy with every state sample transformed by `f`.
    pub fn map_states(&self, mut f: impl FnMut(usize, &mut [f64])) -> Self {
        let mut out = self.clone();
        for (k, s) in out.states.chunks_exact_mut(self.dim).enumerate() {
            f(k, s);
        }
        out
    }

    pub fn is_uniform(&self) -> bool {
        let n = (self.len() - 1) as f64;
        let h = self.duration() / n;
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= UNIFORM_GRID_RTOL * h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    #[default]
    Simpson,
    Trapezoid,
}

impl std::str::FromStr for QuadratureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simpson" => Ok(Self::Simpson),
            "trapezoid" => Ok(Self::Trapezoid),
            other => Err(Error::Input(format!("unknown quadrature rule {other:?}"))),
        }
    }
}

impl std::fmt::Display for QuadratureRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Simpson => "simpson",
            Self::Trapezoid => "trapezoid",
        })
    }
}

/// Quadrature on a trajectory's own sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
}

impl QuadratureSpec {
    pub const SIMPSON: Self = Self {
        rule: QuadratureRule::Simpson,
    };
    pub const TRAPEZOID: Self = Self {
        rule: QuadratureRule::Trapezoid,
    };

    /// Weights `w_k` with `∫ g dt ≈ Σ_k w_k g(t_k)`.
    ///
    /// Composite Simpson needs a uniform grid. With an odd number of
    /// intervals the last interval gets the trapezoid rule.
    pub fn weights(&self, times: &[f64]) -> Result<Vec<f64>> {
        if times.len() < 2 {
            return Err(Error::input("quadrature needs at least two nodes"));
        }
        match self.rule {
            QuadratureRule::Trapezoid => Ok(trapezoid_weights(times)),
            QuadratureRule::Simpson => {
                let intervals = times.len() - 1;
                let h = (times[intervals] - times[0]) / intervals as f64;
                let worst = times
                    .windows(2)
                    .map(|w| ((w[1] - w[0]) - h).abs())
                    .fold(0.0, f64::max);
                if worst > UNIFORM_GRID_RTOL * h {
                    return Err(Error::Input(format!(
                        "simpson rule needs a uniform time grid (step deviation {:.3e} relative)",
                        worst / h
                    )));
                }
                Ok(simpson_weights(times.len(), h))
            }
        }
    }
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; times.len()];
    for (k, pair) in times.windows(2).enumerate() {
        let half = 0.5 * (pair[1] - pair[0]);
        w[k] += half;
        w[k + 1] += half;
    }
    w
}

fn simpson_weights(nodes: usize, h: f64) -> Vec<f64> {
    let intervals = nodes - 1;
    let even = intervals - intervals % 2;
    let mut w = vec![0.0; nodes];
    for k in (0..even).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if even < intervals {
        w[even] += 0.5 * h;
        w[intervals] += 0.5 * h;
    }
    w
}

/// `Γ_γ(x) = ∫ K(x, γ(t)) dt`.
pub fn occupation_eval<K: Kernel + ?Sized>(
    traj: &Trajectory,
    x: &[f64],
    kernel: &K,
    quad: QuadratureSpec,
) -> Result<f64> {
    check_dim("occupation kernel argument", traj.dim(), x.len())?;
    let w = quad.weights(traj.times())?;
    Ok(weighted_eval(&w, traj, x, kernel))
}

pub(crate) fn weighted_eval<K: Kernel + ?Sized>(
    weights: &[f64],
    traj: &Trajectory,
    x: &[f64],
    kernel: &K,
) -> f64 {
    weights
        .iter()
        .zip(traj.states())
        .map(|(w, s)| w * kernel.eval_unchecked(x, s))
        .sum()
}

/// `⟨Γ_{γ_j}, Γ_{γ_i}⟩ = ∫∫ K(γ_i(τ), γ_j(t)) dt dτ` by tensor-product quadrature.
pub fn occupation_inner<K: Kernel + ?Sized>(
    traj_i: &Trajectory,
    traj_j: &Trajectory,
    kernel: &K,
    quad: QuadratureSpec,
) -> Result<f64> {
    check_dim("occupation inner product", traj_i.dim(), traj_j.dim())?;
    let wi = quad.weights(traj_i.times())?;
    let wj = quad.weights(traj_j.times())?;
    Ok(weighted_inner(&wi, traj_i, &wj, traj_j, kernel))
}

pub(crate) fn weighted_inner<K: Kernel + ?Sized>(
    wi: &[f64],
    traj_i: &Trajectory,
    wj: &[f64],
    traj_j: &Trajectory,
    kernel: &K,
) -> f64 {
    wi.iter()
        .zip(traj_i.states())
        .map(|(a, si)| a * weighted_eval(wj, traj_j, si, kernel))
        .sum()
}

/// `γ(T) − γ(0)`.
pub fn endpoint_displacement(traj: &Trajectory) -> Vec<f64> {
    traj.end().iter().zip(traj.start()).map(|(e, s)| e - s).collect()
}
