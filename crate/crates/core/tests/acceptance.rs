//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use liouville_dmd::dynamics::{generate_dataset, integrate_rk4, DatasetSpec, EvalGrid, OdeSystem};
use liouville_dmd::estimators::{extract_modes, fit_sldmd};
use liouville_dmd::kernel::{eval_kernel, KernelParams};
use liouville_dmd::operator::{finite_rank_matrix, pinv_svd, GramPack};
use liouville_dmd::sweep::{okr_gap, run_lambda_sweep, zero_model_error, SweepSetup};
use liouville_dmd::trajectory::{occupation_eval, occupation_inner, QuadratureSpec, Trajectory};

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

fn params() -> KernelParams {
    KernelParams::new(5.0).unwrap()
}

// ---------------------------------------------------------------- 1

fn random_psd(rng: &mut ChaCha8Rng, n: usize, log_cond: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    // Factor singular values span sqrt(κ); squaring gives κ.
    let s: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(-0.5 * log_cond * i as f64 / (n - 1) as f64))
        .collect();
    let mut b = q;
    for (mut col, si) in b.column_iter_mut().zip(&s) {
        col *= *si;
    }
    &b * b.transpose()
}

/// Matrix in unevaluated double-double form `hi + lo`.
struct Dd {
    hi: DMatrix<f64>,
    lo: DMatrix<f64>,
}

impl Dd {
    fn exact(m: &DMatrix<f64>) -> Self {
        Dd { hi: m.clone(), lo: DMatrix::zeros(m.nrows(), m.ncols()) }
    }

    /// `self · b` with error-free products and compensated sums.
    fn mul(&self, b: &DMatrix<f64>) -> Self {
        let (r, c) = (self.hi.nrows(), b.ncols());
        let mut hi = DMatrix::zeros(r, c);
        let mut lo = DMatrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                let (mut s, mut e) = (0.0f64, 0.0f64);
                for k in 0..b.nrows() {
                    for a in [self.hi[(i, k)], self.lo[(i, k)]] {
                        let p = a * b[(k, j)];
                        e += a.mul_add(b[(k, j)], -p);
                        let t = s + p;
                        let bp = t - s;
                        e += (s - (t - bp)) + (p - bp);
                        s = t;
                    }
                }
                hi[(i, j)] = s;
                lo[(i, j)] = e;
            }
        }
        Dd { hi, lo }
    }

    fn rel_to(&self, target: &DMatrix<f64>) -> f64 {
        ((&self.hi - target) + &self.lo).norm() / target.norm()
    }

    fn asymmetry(&self) -> f64 {
        ((&self.hi - self.hi.transpose()) + (&self.lo - self.lo.transpose())).norm() / self.hi.norm()
    }
}

fn penrose() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20231);
    let mut worst = [0.0f64; 5];
    // Largest log10 κ up to which every case met all tolerances.
    let mut clean_upto = f64::INFINITY;
    for case in 0..50 {
        let n = rng.random_range(3..=30);
        let log_cond = if case % 5 == 4 { 12.0 } else { rng.random_range(0.0..12.0) };
        let a = random_psd(&mut rng, n, log_cond);
        let (x, svd) = pinv_svd(&a, None).unwrap();
        let ax = Dd::exact(&a).mul(&x);
        let xa = Dd::exact(&x).mul(&a);
        let errs = [
            ax.mul(&a).rel_to(&a),
            xa.mul(&x).rel_to(&x),
            ax.asymmetry(),
            xa.asymmetry(),
            rel(&svd.reconstruct(), &x),
        ];
        if errs[..4].iter().any(|e| *e > 1e-8) || errs[4] > 1e-10 {
            clean_upto = clean_upto.min(log_cond);
        }
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
    }
    let elapsed = start.elapsed();
    let pass = worst[..4].iter().all(|e| *e <= 1e-8) && worst[4] <= 1e-10 && elapsed < Duration::from_secs(5);
    Outcome {
        pass,
        detail: format!(
            "worst AXA=A {:.1e}, XAX=X {:.1e}, (AX)ᵀ {:.1e}, (XA)ᵀ {:.1e}, reconstruct {:.1e}; \
             first violation at log10 κ = {clean_upto:.1}; {:.2?}",
            worst[0], worst[1], worst[2], worst[3], worst[4], elapsed
        ),
    }
}

// ---------------------------------------------------------------- 2

type Curve = Box<dyn Fn(f64) -> [f64; 2]>;

fn curves() -> Vec<Curve> {
    vec![
        Box::new(|_| [1.0, -0.5]),
        Box::new(|t| [0.3 + 1.2 * t, -1.0 + 0.7 * t]),
        Box::new(|t| [(2.0 * std::f64::consts::PI * t).cos(), (2.0 * std::f64::consts::PI * t).sin()]),
        Box::new(|t| [(-t).exp(), 2.0 * (-t).exp()]),
        Box::new(|t| {
            let r = 2.0 * (-0.5 * t).exp();
            [r * t.cos(), -r * t.sin()]
        }),
        Box::new(|t| [t, t * t]),
        Box::new(|t| [2.0 * (3.0 * t).sin(), (1.5 * t).cos() - 1.0]),
        Box::new(|t| [(t - 0.5).tanh() * 2.0, 1.0 / (1.0 + t * t)]),
        Box::new(|t| [-1.5 + t * t * t, 0.5 * (2.0 * t).exp()]),
        Box::new(|t| [(t * 4.0).cos() * (1.0 + t), (t * 4.0).sin() * (1.0 - 0.5 * t)]),
    ]
}

fn sample(c: &Curve, dt: f64) -> Trajectory {
    let n = (1.0 / dt).round() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let states = times.iter().map(|&t| c(t).to_vec()).collect();
    Trajectory::new(times, states).unwrap()
}

fn trap_nodes(nodes: usize) -> Vec<(f64, f64)> {
    let h = 1.0 / (nodes - 1) as f64;
    (0..nodes)
        .map(|k| (k as f64 * h, if k == 0 || k == nodes - 1 { 0.5 * h } else { h }))
        .collect()
}

fn oracle_eval(c: &Curve, x: &[f64]) -> f64 {
    let p = params();
    trap_nodes(1_000_001)
        .iter()
        .map(|&(t, w)| w * eval_kernel(&p, x, &c(t)).unwrap())
        .sum()
}

fn oracle_inner(a: &Curve, b: &Curve) -> f64 {
    let p = params();
    let nodes = trap_nodes(1000);
    let pa: Vec<[f64; 2]> = nodes.iter().map(|&(t, _)| a(t)).collect();
    let pb: Vec<[f64; 2]> = nodes.iter().map(|&(t, _)| b(t)).collect();
    let mut sum = 0.0;
    for (i, &(_, wi)) in nodes.iter().enumerate() {
        for (j, &(_, wj)) in nodes.iter().enumerate() {
            sum += wi * wj * eval_kernel(&p, &pa[i], &pb[j]).unwrap();
        }
    }
    sum
}

/// Closed forms for the constant and straight-line curves.
fn exact_eval(idx: usize, x: &[f64]) -> Option<f64> {
    let mu = 5.0;
    match idx {
        0 => Some(((x[0] - 0.5 * x[1]) / mu).exp()),
        1 => {
            let a = (0.3 * x[0] - 1.0 * x[1]) / mu;
            let s = (1.2 * x[0] + 0.7 * x[1]) / mu;
            Some(if s.abs() < 1e-14 { a.exp() } else { a.exp() * s.exp_m1() / s })
        }
        _ => None,
    }
}

fn quadrature_oracle() -> Outcome {
    let p = params();
    let cs = curves();
    let trajs: Vec<Trajectory> = cs.iter().map(|c| sample(c, 0.01)).collect();
    let points = [[0.0, 0.0], [1.0, 2.0], [-2.0, 0.5], [3.0, -3.0], [-1.5, -2.5]];
    let mut worst_eval = 0.0f64;
    let mut worst_inner = 0.0f64;
    for (i, (c, traj)) in cs.iter().zip(&trajs).enumerate() {
        for x in &points {
            let got = occupation_eval(traj, x, &p, QuadratureSpec::SIMPSON).unwrap();
            let want = exact_eval(i, x).unwrap_or_else(|| oracle_eval(c, x));
            worst_eval = worst_eval.max(((got - want) / want).abs());
        }
        let j = (i + 1) % cs.len();
        let got = occupation_inner(traj, &trajs[j], &p, QuadratureSpec::SIMPSON).unwrap();
        let want = oracle_inner(c, &cs[j]);
        worst_inner = worst_inner.max(((got - want) / want).abs());
    }
    Outcome {
        pass: worst_eval <= 1e-5 && worst_inner <= 1e-5,
        detail: format!("worst relative error: eval {worst_eval:.1e}, inner {worst_inner:.1e}"),
    }
}

// ---------------------------------------------------------------- 3, 4

fn six_trajectory_pack(system: &OdeSystem) -> GramPack {
    let ics = [[2.0, 0.0], [0.0, 2.0], [-2.0, 0.0], [0.0, -2.0], [1.5, 1.5], [-1.5, -1.5]];
    let trajs: Vec<Trajectory> = ics
        .iter()
        .map(|x0| integrate_rk4(system, x0, 1.0, 0.01).unwrap())
        .collect();
    GramPack::assemble(trajs, params(), params(), QuadratureSpec::SIMPSON).unwrap()
}

fn okr_equivalence() -> Outcome {
    let pack = six_trajectory_pack(&OdeSystem::linear_spiral());
    let gaps = okr_gap(&pack, &[1e-4, 1e-8, 1e-12], None).unwrap();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    Outcome {
        pass: gaps[2] <= 1e-6 && monotone,
        detail: format!("gaps at 1e-4, 1e-8, 1e-12: {:.2e}, {:.2e}, {:.2e}", gaps[0], gaps[1], gaps[2]),
    }
}

fn training_consistency() -> Outcome {
    let pack = six_trajectory_pack(&OdeSystem::linear_spiral());
    let model = fit_sldmd(&pack, None).unwrap();
    let svd_rank = pinv_svd(&pack.g_r, None).unwrap().1.rank;
    let r = rel(&(model.coefficients() * &pack.g_r), &pack.d);
    Outcome {
        pass: svd_rank == pack.len() && r <= 1e-8,
        detail: format!("‖A G_r − D‖/‖D‖ = {r:.1e}, rank {svd_rank}/{}", pack.len()),
    }
}

// ---------------------------------------------------------------- 5

/// 5 × 5 grid on [−1, 1]² ordered so every prefix of length 4, 9, 16, 25 is
/// a coarse-to-fine refinement: corners, the rest of the 3 × 3 grid, then
/// the half-step nodes.
fn nested_initial_conditions() -> Vec<[f64; 2]> {
    let level = |i: i32| -> u8 {
        if i % 4 == 0 {
            0
        } else if i % 2 == 0 {
            1
        } else {
            2
        }
    };
    let mut nodes: Vec<(u8, i32, i32)> = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            nodes.push((level(i).max(level(j)), i, j));
        }
    }
    nodes.sort();
    nodes
        .iter()
        .map(|&(_, i, j)| [-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64])
        .collect()
}

fn convergence_in_m() -> Outcome {
    let start = Instant::now();
    let system = OdeSystem::linear_decay(2);
    let ics = nested_initial_conditions();
    let grid = EvalGrid::cube(-1.0, 1.0, 2, 21).unwrap();
    let points = grid.points();
    let mut errs = Vec::new();
    for m in [4usize, 9, 16, 25] {
        let trajs: Vec<Trajectory> = ics[..m]
            .iter()
            .map(|x0| integrate_rk4(&system, x0, 1.0, 0.01).unwrap())
            .collect();
        let pack = GramPack::assemble(trajs, params(), params(), QuadratureSpec::SIMPSON).unwrap();
        let model = fit_sldmd(&pack, None).unwrap();
        let fitted = model.eval_many(&points).unwrap();
        let sup = points
            .iter()
            .enumerate()
            .map(|(k, x)| ((fitted[(0, k)] + x[0]).powi(2) + (fitted[(1, k)] + x[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        errs.push(sup);
    }
    let elapsed = start.elapsed();
    let non_increasing = errs.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    Outcome {
        pass: errs[3] <= errs[0] / 5.0 && non_increasing && elapsed < Duration::from_secs(30),
        detail: format!(
            "sup errors M=4,9,16,25: {:.2e}, {:.2e}, {:.2e}, {:.2e}, {:.2?}",
            errs[0], errs[1], errs[2], errs[3], elapsed
        ),
    }
}

// ---------------------------------------------------------------- 6

fn duffing_shape() -> Vec<(&'static str, Outcome)> {
    let start = Instant::now();
    let setup = SweepSetup::duffing_default();
    let clean = generate_dataset(&DatasetSpec::duffing_default()).unwrap();
    let noisy = generate_dataset(&DatasetSpec::duffing_default().with_noise(0.001, 2023)).unwrap();
    let plateau = zero_model_error(&setup.system, setup.component, &setup.grid).unwrap();
    let clean_rows = run_lambda_sweep(clean, &setup).unwrap();
    let noisy_rows = run_lambda_sweep(noisy, &setup).unwrap();
    let elapsed = start.elapsed();

    let band: Vec<_> = clean_rows.iter().filter(|r| r.lambda <= 1e-3 * (1.0 + 1e-12)).collect();
    let worst_ratio = band
        .iter()
        .map(|r| (r.okr_err / r.sldmd_err).max(r.sldmd_err / r.okr_err))
        .fold(0.0, f64::max);
    let (lo, hi) = band.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
        (lo.min(r.okr_err), hi.max(r.okr_err))
    });
    let a = Outcome {
        pass: worst_ratio <= 2.0 && elapsed < Duration::from_secs(300),
        detail: format!(
            "sldmd_err {:.2e}; okr_err over [1e-10, 1e-3] spans {lo:.2e}..{hi:.2e}; worst ratio {worst_ratio:.1}",
            clean_rows[0].sldmd_err
        ),
    };

    let plateau_dev = clean_rows
        .iter()
        .filter(|r| r.lambda >= 1e3)
        .map(|r| (r.okr_err - plateau).abs() / plateau)
        .fold(0.0, f64::max);
    let b = Outcome {
        pass: plateau_dev <= 0.05,
        detail: format!("zero-model error {plateau:.4}; worst deviation for λ ≥ 1e3 {:.2}%", 100.0 * plateau_dev),
    };

    let best = noisy_rows
        .iter()
        .min_by(|x, y| x.okr_err.total_cmp(&y.okr_err))
        .unwrap();
    let c = Outcome {
        pass: best.okr_err <= best.sldmd_err,
        detail: format!(
            "noisy: min okr_err {:.3e} at λ = {:.1e}, sldmd_err {:.3e}; both sweeps {elapsed:.2?}",
            best.okr_err, best.lambda, best.sldmd_err
        ),
    };
    vec![("6a", a), ("6b", b), ("6c", c)]
}

// ---------------------------------------------------------------- 7

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "noise_std = 0.001\nseed = 2023\nlambda_min = 1e-8\nlambda_max = 1e2\nlambda_count = 11\n",
    )
    .unwrap();
    let run = |name: &str| -> Vec<u8> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_liouville-dmd"))
            .arg("sweep")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("a.dat");
    let b = run("b.dat");
    Outcome {
        pass: a == b && !a.is_empty(),
        detail: format!("{} bytes per run, identical: {}", a.len(), a == b),
    }
}

// ---------------------------------------------------------------- 8

fn singular_identity() -> Outcome {
    let trajs = generate_dataset(&DatasetSpec::duffing_default()).unwrap();
    let pack = GramPack::assemble(trajs, params(), params(), QuadratureSpec::SIMPSON).unwrap();
    let fr = finite_rank_matrix(&pack.g_r, &pack.g_d, None).unwrap();
    let (_, svd) = pinv_svd(&pack.g_r, None).unwrap();
    let e1 = rel(&(svd.reconstruct() * &pack.g_d), &fr);

    let model = fit_sldmd(&pack, None).unwrap();
    let mut xi_sigma = extract_modes(&pack, None).unwrap();
    for (mut col, s) in xi_sigma.column_iter_mut().zip(svd.sigma.iter()) {
        col *= *s;
    }
    let e2 = rel(&(xi_sigma * svd.w.transpose()), model.coefficients());
    Outcome {
        pass: e1 <= 1e-10 && e2 <= 1e-10,
        detail: format!("finite-rank identity {e1:.1e}, modes identity {e2:.1e}, rank {}", svd.rank),
    }
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1", penrose()),
        ("2", quadrature_oracle()),
        ("3", okr_equivalence()),
        ("4", training_consistency()),
        ("5", convergence_in_m()),
    ];
    results.extend(duffing_shape());
    results.push(("7", determinism()));
    results.push(("8", singular_identity()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name:<3} {}  {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
