//! Occupation kernels `Γ_γ(x) = ∫ K(x, γ(t)) dt` under Simpson and trapezoid rules.

use liouville_dmd::kernel::KernelParams;
use liouville_dmd::trajectory::{occupation_eval, occupation_inner, QuadratureSpec, Trajectory};

fn line(dt: f64) -> liouville_dmd::Result<Trajectory> {
    let n = (1.0 / dt).round() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let states = times.iter().map(|&t| vec![t, 1.0 - t]).collect();
    Trajectory::new(times, states)
}

fn main() -> liouville_dmd::Result<()> {
    let k = KernelParams::new(5.0)?;
    let x = [2.0, 1.0];
    // ∫₀¹ exp((2t + 1 − t)/5) dt = 5 e^{1/5} (e^{1/5} − 1)
    let exact = 5.0 * 0.2f64.exp() * 0.2f64.exp_m1();
    println!("Γ_γ(x) exact {exact:.15}");
    println!("{:>8} {:>12} {:>12}", "dt", "simpson", "trapezoid");
    for dt in [0.1, 0.05, 0.02, 0.01] {
        let traj = line(dt)?;
        let s = occupation_eval(&traj, &x, &k, QuadratureSpec::SIMPSON)?;
        let t = occupation_eval(&traj, &x, &k, QuadratureSpec::TRAPEZOID)?;
        println!("{dt:>8} {:>12.3e} {:>12.3e}", (s - exact).abs(), (t - exact).abs());
    }

    let traj = line(0.01)?;
    let g = occupation_inner(&traj, &traj, &k, QuadratureSpec::SIMPSON)?;
    println!("‖Γ_γ‖² = {g:.12}");
    Ok(())
}
