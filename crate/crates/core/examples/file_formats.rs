//! Writing and reading datasets, model files and sweep tables.

use liouville_dmd::dynamics::{generate_dataset, DatasetSpec, EvalGrid, OdeSystem};
use liouville_dmd::estimators::fit_okr;
use liouville_dmd::io::{load_model, read_dat, read_trajectories, save_model, write_dat, write_trajectories};
use liouville_dmd::kernel::KernelParams;
use liouville_dmd::operator::GramPack;
use liouville_dmd::sweep::{run_lambda_sweep, SweepSetup};
use liouville_dmd::trajectory::QuadratureSpec;

fn main() -> liouville_dmd::Result<()> {
    let dir = std::env::temp_dir().join("liouville-dmd-file-formats");
    let spec = DatasetSpec {
        system: OdeSystem::duffing(),
        grid: EvalGrid::cube(-2.0, 2.0, 2, 4)?,
        ..DatasetSpec::duffing_default()
    }
    .with_noise(0.001, 7);
    let trajs = generate_dataset(&spec)?;

    let manifest = write_trajectories(&trajs, &dir.join("data"), Some(&spec))?;
    println!("{}", std::fs::read_to_string(&manifest).unwrap_or_default());
    assert_eq!(read_trajectories(&manifest)?, trajs);

    let k = KernelParams::new(5.0)?;
    let pack = GramPack::assemble(trajs.clone(), k, k, QuadratureSpec::SIMPSON)?;
    let model = fit_okr(&pack, 1e-4)?;
    let model_path = dir.join("okr.toml");
    save_model(&model, &model_path)?;
    let loaded = load_model(&model_path)?;
    println!("model at {}: f̂(1, 0) = {:?}", model_path.display(), loaded.eval(&[1.0, 0.0])?);

    let setup = SweepSetup {
        lambdas: vec![1e-8, 1e-4, 1.0, 1e4],
        grid: EvalGrid::cube(-2.0, 2.0, 2, 21)?,
        ..SweepSetup::duffing_default()
    };
    let rows = run_lambda_sweep(trajs, &setup)?;
    let dat = dir.join("sweep.dat");
    write_dat(&rows, &dat, &["small Duffing sweep".to_string()])?;
    print!("{}", std::fs::read_to_string(&dat).unwrap_or_default());
    assert_eq!(read_dat(&dat)?, rows);
    Ok(())
}
