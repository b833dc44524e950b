//! Ground-truth systems, RK4 trajectory generation and seeded measurement noise.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::trajectory::Trajectory;

type Field = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// An autonomous system `ẋ = f(x)` on `ℝⁿ`.
#[derive(Clone)]
pub struct OdeSystem {
    name: String,
    dim: usize,
    field: Arc<Field>,
}

impl fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl OdeSystem {
    /// `field(x, out)` must write `f(x)` into `out` (length `dim`).
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        field: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            field: Arc::new(field),
        }
    }

    /// `ẋ₁ = x₂`, `ẋ₂ = x₁ − x₁³`.
    pub fn duffing() -> Self {
        Self::new("duffing", 2, |x, out| {
            out[0] = x[1];
            out[1] = x[0] - x[0] * x[0] * x[0];
        })
    }

    /// `ẋ = −x` on `ℝⁿ`.
    pub fn linear_decay(dim: usize) -> Self {
        Self::new(format!("decay{dim}"), dim, |x, out| {
            for (o, v) in out.iter_mut().zip(x) {
                *o = -v;
            }
        })
    }

    /// Damped rotation `ẋ₁ = −x₁/2 + x₂`, `ẋ₂ = −x₁ − x₂/2`.
    pub fn linear_spiral() -> Self {
        Self::new("spiral", 2, |x, out| {
            out[0] = -0.5 * x[0] + x[1];
            out[1] = -x[0] - 0.5 * x[1];
        })
    }

    /// Looks up a built-in system: `duffing`, `decay<n>`, `spiral`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "duffing" => Ok(Self::duffing()),
            "spiral" => Ok(Self::linear_spiral()),
            _ => match name.strip_prefix("decay").map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 1 => Ok(Self::linear_decay(n)),
                _ => Err(Error::Input(format!("unknown system {name:?}"))),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.field)(x, out)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("system state", self.dim, x.len())?;
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        Ok(out)
    }
}

/// Conserved energy of the Duffing system, `x₂²/2 − x₁²/2 + x₁⁴/4`.
pub fn duffing_energy(x: &[f64]) -> f64 {
    let x1 = x[0];
    0.5 * x[1] * x[1] - 0.5 * x1 * x1 + 0.25 * x1 * x1 * x1 * x1
}

/// Uniform grid over an axis-aligned box, nodes in row-major order
/// (last coordinate varies fastest). A count of 1 puts the node at `min`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub counts: Vec<usize>,
}

impl EvalGrid {
    pub fn new(min: Vec<f64>, max: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if min.is_empty() || min.len() != max.len() || min.len() != counts.len() {
            return Err(Error::Input(format!(
                "grid corners and counts must share a nonzero dimension ({}, {}, {})",
                min.len(),
                max.len(),
                counts.len()
            )));
        }
        if min.iter().chain(&max).any(|v| !v.is_finite()) {
            return Err(Error::input("grid corners must be finite"));
        }
        Ok(Self { min, max, counts })
    }

    /// `counts` nodes per axis over the cube `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize, count: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], vec![count; dim])
    }

    /// 61 × 61 over `[−3, 3]²`.
    pub fn default_eval() -> Self {
        Self::cube(-3.0, 3.0, 2, 61).expect("valid default grid")
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(&self, d: usize, k: usize) -> f64 {
        let c = self.counts[d];
        if c <= 1 {
            self.min[d]
        } else {
            self.min[d] + (self.max[d] - self.min[d]) * k as f64 / (c - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|mut flat| {
                let mut p = vec![0.0; self.dim()];
                for d in (0..self.dim()).rev() {
                    p[d] = self.axis(d, flat % self.counts[d]);
                    flat /= self.counts[d];
                }
                p
            })
            .collect()
    }
}

/// Exact `(x, f(x))` at every grid node.
pub fn true_field_grid(system: &OdeSystem, grid: &EvalGrid) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    check_dim("evaluation grid", system.dim(), grid.dim())?;
    Ok(grid
        .points()
        .into_iter()
        .map(|p| {
            let mut f = vec![0.0; system.dim()];
            system.eval_into(&p, &mut f);
            (p, f)
        })
        .collect())
}

fn rk4_step(system: &OdeSystem, x: &[f64], h: f64, scratch: &mut [Vec<f64>; 5], out: &mut [f64]) {
    let [k1, k2, k3, k4, tmp] = scratch;
    system.eval_into(x, k1);
    for i in 0..x.len() {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    system.eval_into(tmp, k2);
    for i in 0..x.len() {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    system.eval_into(tmp, k3);
    for i in 0..x.len() {
        tmp[i] = x[i] + h * k3[i];
    }
    system.eval_into(tmp, k4);
    for i in 0..x.len() {
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Number of steps of size `dt` covering `duration`, tolerating roundoff in
/// the ratio.
fn step_count(duration: f64, dt: f64) -> usize {
    let ratio = duration / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Classical fixed-step RK4 from `x0` over `[0, duration]`, sampled at every
/// step. The final step is shortened when `duration` is not a multiple of `dt`.
pub fn integrate_rk4(system: &OdeSystem, x0: &[f64], duration: f64, dt: f64) -> Result<Trajectory> {
    check_dim("initial condition", system.dim(), x0.len())?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Input(format!("duration must be positive, got {duration}")));
    }
    if !(dt > 0.0 && dt <= duration) {
        return Err(Error::Input(format!("dt must lie in (0, duration], got {dt}")));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("initial condition {x0:?} is not finite")));
    }
    let steps = step_count(duration, dt).max(2);
    let n = x0.len();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity((steps + 1) * n);
    times.push(0.0);
    states.extend_from_slice(x0);

    let mut scratch: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let mut next = vec![0.0; n];
    for k in 1..=steps {
        let t_prev = times[k - 1];
        let t = if k == steps { duration } else { k as f64 * dt };
        let x = &states[(k - 1) * n..k * n];
        rk4_step(system, x, t - t_prev, &mut scratch, &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                time: t_prev,
                last_state: x.to_vec(),
                message: format!("non-finite state while integrating {}", system.name()),
            });
        }
        times.push(t);
        states.extend_from_slice(&next);
    }
    Trajectory::from_flat(times, n, states)
}

/// Parameters for a grid of trajectories with optional measurement noise.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub system: OdeSystem,
    /// Initial conditions.
    pub grid: EvalGrid,
    pub duration: f64,
    pub dt: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl DatasetSpec {
    /// 13 × 13 Duffing initial conditions over `[−3, 3]²`, `T = 1`, `dt = 0.01`, clean.
    pub fn duffing_default() -> Self {
        Self {
            system: OdeSystem::duffing(),
            grid: EvalGrid::cube(-3.0, 3.0, 2, 13).expect("valid grid"),
            duration: 1.0,
            dt: 0.01,
            noise_std: 0.0,
            seed: 0,
        }
    }

    pub fn with_noise(mut self, noise_std: f64, seed: u64) -> Self {
        self.noise_std = noise_std;
        self.seed = seed;
        self
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal draw keyed by `(seed, trajectory, sample, component)`.
pub fn noise_draw(seed: u64, trajectory: usize, sample: usize, component: usize) -> f64 {
    let key = [trajectory as u64, sample as u64, component as u64]
        .iter()
        .fold(splitmix64(seed), |h, &v| splitmix64(h ^ v));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    StandardNormal.sample(&mut rng)
}

/// Adds i.i.d. `N(0, std²)` noise to every state component of trajectory `index`.
pub fn add_noise(traj: &Trajectory, std: f64, seed: u64, index: usize) -> Trajectory {
    traj.map_states(|k, s| {
        for (c, v) in s.iter_mut().enumerate() {
            *v += std * noise_draw(seed, index, k, c);
        }
    })
}

/// One trajectory per initial-condition grid node, in row-major order.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<Vec<Trajectory>> {
    check_dim("initial-condition grid", spec.system.dim(), spec.grid.dim())?;
    if !(spec.noise_std >= 0.0 && spec.noise_std.is_finite()) {
        return Err(Error::Input(format!(
            "noise_std must be ≥ 0, got {}",
            spec.noise_std
        )));
    }
    let starts = spec.grid.points();
    if starts.is_empty() {
        return Err(Error::input("initial-condition grid is empty"));
    }
    starts
        .par_iter()
        .enumerate()
        .map(|(j, x0)| {
            let clean = integrate_rk4(&spec.system, x0, spec.duration, spec.dt).map_err(|e| match e {
                Error::Divergence {
                    time,
                    last_state,
                    message,
                } => Error::Divergence {
                    time,
                    last_state,
                    message: format!("{message} from initial condition {x0:?}"),
                },
                other => other,
            })?;
            Ok(if spec.noise_std > 0.0 {
                add_noise(&clean, spec.noise_std, spec.seed, j)
            } else {
                clean
            })
        })
        .collect()
}

/// Second-order finite-difference velocity estimates at every sample.
///
/// Not used by the estimators, which need only endpoints and integrals.
pub fn central_difference(traj: &Trajectory) -> Vec<Vec<f64>> {
    let t = traj.times();
    let last = traj.len() - 1;
    (0..=last)
        .map(|k| {
            let (a, b) = match k {
                0 => (0, 1),
                k if k == last => (last - 1, last),
                k => (k - 1, k + 1),
            };
            let h = t[b] - t[a];
            traj.state(b)
                .iter()
                .zip(traj.state(a))
                .map(|(xb, xa)| (xb - xa) / h)
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_constant_trajectory() {
        let sys = OdeSystem::new("zero", 2, |_, out| out.fill(0.0));
        let traj = integrate_rk4(&sys, &[0.3, -0.2], 1.0, 0.1).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.states().all(|s| s == [0.3, -0.2]));
    }

    #[test]
    fn decay_matches_closed_form() {
        let traj = integrate_rk4(&OdeSystem::linear_decay(1), &[1.0], 1.0, 0.01).unwrap();
        assert_eq!(traj.len(), 101);
        assert_eq!(*traj.times().last().unwrap(), 1.0);
        assert!((traj.end()[0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let sys = OdeSystem::linear_decay(1);
        let exact = (-1.0f64).exp();
        let err = |dt| (integrate_rk4(&sys, &[1.0], 1.0, dt).unwrap().end()[0] - exact).abs();
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 / e2 >= 12.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn final_step_is_shortened() {
        let traj = integrate_rk4(&OdeSystem::linear_decay(1), &[1.0], 1.0, 0.3).unwrap();
        assert_eq!(traj.len(), 5);
        assert_eq!(traj.times()[3], 3.0 * 0.3);
        assert_eq!(traj.times()[4], 1.0);
        assert!((traj.end()[0] - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn duffing_conserves_energy() {
        let traj = integrate_rk4(&OdeSystem::duffing(), &[1.0, 0.0], 10.0, 0.01).unwrap();
        let h0 = duffing_energy(traj.start());
        let drift = traj
            .states()
            .map(|s| (duffing_energy(s) - h0).abs())
            .fold(0.0, f64::max);
        assert!(drift <= 1e-6, "drift {drift}");
    }

    #[test]
    fn divergence_is_reported() {
        let sys = OdeSystem::new("blowup", 1, |x, out| out[0] = x[0] * x[0] * x[0] * x[0]);
        match integrate_rk4(&sys, &[10.0], 10.0, 0.1) {
            Err(Error::Divergence { last_state, .. }) => assert!(last_state[0].is_finite()),
            other => panic!("expected divergence, got {other:?}"),
        }
        let spec = DatasetSpec {
            system: sys,
            grid: EvalGrid::cube(10.0, 10.0, 1, 1).unwrap(),
            duration: 10.0,
            dt: 0.1,
            noise_std: 0.0,
            seed: 0,
        };
        let msg = generate_dataset(&spec).unwrap_err().to_string();
        assert!(msg.contains("[10.0]"), "{msg}");
    }

    #[test]
    fn rejects_bad_integration_input() {
        let sys = OdeSystem::linear_decay(2);
        assert!(integrate_rk4(&sys, &[1.0], 1.0, 0.1).is_err());
        assert!(integrate_rk4(&sys, &[1.0, 0.0], 0.0, 0.1).is_err());
        assert!(integrate_rk4(&sys, &[1.0, 0.0], 1.0, 2.0).is_err());
        assert!(integrate_rk4(&sys, &[1.0, 0.0], 1.0, -0.1).is_err());
    }

    #[test]
    fn true_field_examples() {
        let grid = EvalGrid::new(vec![0.0, 0.0], vec![2.0, 1.0], vec![3, 2]).unwrap();
        let vals = true_field_grid(&OdeSystem::duffing(), &grid).unwrap();
        let lookup = |p: [f64; 2]| vals.iter().find(|(q, _)| q == &p).unwrap().1.clone();
        assert_eq!(lookup([0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(lookup([1.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(lookup([2.0, 1.0]), vec![1.0, -6.0]);
    }

    #[test]
    fn grid_is_row_major() {
        let g = EvalGrid::new(vec![0.0, 10.0], vec![1.0, 20.0], vec![2, 3]).unwrap();
        let pts = g.points();
        assert_eq!(pts[0], vec![0.0, 10.0]);
        assert_eq!(pts[1], vec![0.0, 15.0]);
        assert_eq!(pts[3], vec![1.0, 10.0]);
        assert_eq!(pts.len(), 6);
    }

    #[test]
    fn dataset_sizes_and_determinism() {
        let single = DatasetSpec {
            grid: EvalGrid::cube(0.5, 0.5, 2, 1).unwrap(),
            ..DatasetSpec::duffing_default()
        };
        let one = generate_dataset(&single).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].start(), &[0.5, 0.5]);

        let clean = generate_dataset(&DatasetSpec::duffing_default()).unwrap();
        assert_eq!(clean.len(), 169);
        assert_eq!(clean[0].start(), &[-3.0, -3.0]);
        assert_eq!(clean[168].start(), &[3.0, 3.0]);

        let noisy = DatasetSpec::duffing_default().with_noise(0.001, 42);
        let a = generate_dataset(&noisy).unwrap();
        let b = generate_dataset(&noisy).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, clean);
        let other = generate_dataset(&DatasetSpec::duffing_default().with_noise(0.001, 43)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn noise_moments() {
        let std = 0.001;
        let draws: Vec<f64> = (0..100_000)
            .map(|i| std * noise_draw(9, i / 1000, i % 1000, i % 2))
            .collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() <= 4.0 * std / n.sqrt(), "mean {mean}");
        assert!((var.sqrt() / std - 1.0).abs() <= 0.02, "std {}", var.sqrt());
    }

    #[test]
    fn central_difference_of_line() {
        let sys = OdeSystem::new("drift", 1, |_, out| out[0] = 2.0);
        let traj = integrate_rk4(&sys, &[0.0], 1.0, 0.25).unwrap();
        for v in central_difference(&traj) {
            assert!((v[0] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn systems_by_name() {
        assert_eq!(OdeSystem::by_name("duffing").unwrap().dim(), 2);
        assert_eq!(OdeSystem::by_name("decay3").unwrap().dim(), 3);
        assert_eq!(OdeSystem::by_name("spiral").unwrap().eval(&[1.0, 0.0]).unwrap(), vec![-0.5, -1.0]);
        assert!(OdeSystem::by_name("decay0").is_err());
        assert!(OdeSystem::by_name("lorenz").is_err());
    }
}
