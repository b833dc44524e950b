//! Integrating a fitted Duffing model and comparing with the true flow.

use liouville_dmd::dynamics::{duffing_energy, generate_dataset, integrate_rk4, DatasetSpec, OdeSystem};
use liouville_dmd::estimators::{fit_sldmd, predict_flow};
use liouville_dmd::kernel::KernelParams;
use liouville_dmd::operator::GramPack;
use liouville_dmd::trajectory::QuadratureSpec;

fn main() -> liouville_dmd::Result<()> {
    let k = KernelParams::new(5.0)?;
    let pack = GramPack::assemble(generate_dataset(&DatasetSpec::duffing_default())?, k, k, QuadratureSpec::SIMPSON)?;
    let model = fit_sldmd(&pack, None)?;

    let x0 = [0.5, 0.5];
    let predicted = predict_flow(&model, &x0, 5.0, 0.01)?;
    let truth = integrate_rk4(&OdeSystem::duffing(), &x0, 5.0, 0.01)?;
    println!("{:>5} {:>22} {:>22} {:>10}", "t", "predicted", "true", "energy");
    for k in (0..predicted.len()).step_by(50) {
        let (p, q) = (predicted.state(k), truth.state(k));
        println!(
            "{:>5.2} [{:+.5}, {:+.5}] [{:+.5}, {:+.5}] {:+.6}",
            predicted.times()[k],
            p[0],
            p[1],
            q[0],
            q[1],
            duffing_energy(p)
        );
    }
    Ok(())
}
