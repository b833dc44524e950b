//! OKR coefficients approach the SLDMD ones as `λ → 0` and shrink to zero as `λ → ∞`.

use liouville_dmd::dynamics::{integrate_rk4, OdeSystem};
use liouville_dmd::estimators::{fit_okr, fit_sldmd};
use liouville_dmd::kernel::KernelParams;
use liouville_dmd::operator::GramPack;
use liouville_dmd::sweep::okr_gap;
use liouville_dmd::trajectory::{QuadratureSpec, Trajectory};

fn main() -> liouville_dmd::Result<()> {
    let system = OdeSystem::linear_spiral();
    let ics = [[2.0, 0.0], [0.0, 2.0], [-2.0, 0.0], [0.0, -2.0], [1.5, 1.5], [-1.5, -1.5]];
    let trajs = ics
        .iter()
        .map(|x0| integrate_rk4(&system, x0, 1.0, 0.01))
        .collect::<liouville_dmd::Result<Vec<Trajectory>>>()?;
    let k = KernelParams::new(5.0)?;
    let pack = GramPack::assemble(trajs, k, k, QuadratureSpec::SIMPSON)?;

    let lambdas = [1e2, 1.0, 1e-2, 1e-4, 1e-8, 1e-12];
    let gaps = okr_gap(&pack, &lambdas, None)?;
    println!("{:>8} {:>14} {:>12}", "lambda", "rel gap", "‖A_okr‖_F");
    for (l, g) in lambdas.iter().zip(&gaps) {
        println!("{l:>8.0e} {g:>14.3e} {:>12.4e}", fit_okr(&pack, *l)?.coefficients().norm());
    }
    println!("‖A_sldmd‖_F = {:.4e}", fit_sldmd(&pack, None)?.coefficients().norm());

    let x = [0.3, -0.7];
    println!("f(x)       = {:?}", system.eval(&x)?);
    println!("SLDMD f̂(x) = {:?}", fit_sldmd(&pack, None)?.eval(&x)?);
    println!("OKR(1e-6)  = {:?}", fit_okr(&pack, 1e-6)?.eval(&x)?);
    Ok(())
}
