use liouville_dmd::dynamics::{generate_dataset, DatasetSpec};
use liouville_dmd::sweep::{run_lambda_sweep, zero_model_error, SweepSetup};

fn main() -> liouville_dmd::Result<()> {
    let setup = SweepSetup::duffing_default();
    let plateau = zero_model_error(&setup.system, setup.component, &setup.grid)?;
    for (label, spec) in [
        ("clean", DatasetSpec::duffing_default()),
        ("noisy", DatasetSpec::duffing_default().with_noise(0.001, 2023)),
    ] {
        let t = std::time::Instant::now();
        let data = generate_dataset(&spec)?;
        let rows = run_lambda_sweep(data, &setup)?;
        println!("# {label} ({} trajectories, {:.1?}), zero-model error {plateau:.6}", spec.grid.len(), t.elapsed());
        println!("# lambda okr_err sldmd_err");
        for r in rows {
            println!("{:e} {:.6} {:.6}", r.lambda, r.okr_err, r.sldmd_err);
        }
    }
    Ok(())
}
