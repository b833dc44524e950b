//! SLDMD on a linear system: the fitted field converges as trajectories are added.

use liouville_dmd::dynamics::{generate_dataset, DatasetSpec, EvalGrid, OdeSystem};
use liouville_dmd::estimators::fit_sldmd;
use liouville_dmd::kernel::KernelParams;
use liouville_dmd::operator::GramPack;
use liouville_dmd::trajectory::QuadratureSpec;

fn main() -> liouville_dmd::Result<()> {
    let system = OdeSystem::linear_spiral();
    let k = KernelParams::new(5.0)?;
    let test_points = EvalGrid::cube(-1.0, 1.0, 2, 21)?.points();

    println!("{:>4} {:>12}", "M", "sup error");
    for count in [2, 3, 4, 5] {
        let spec = DatasetSpec {
            system: system.clone(),
            grid: EvalGrid::cube(-1.0, 1.0, 2, count)?,
            duration: 1.0,
            dt: 0.01,
            noise_std: 0.0,
            seed: 0,
        };
        let pack = GramPack::assemble(generate_dataset(&spec)?, k, k, QuadratureSpec::SIMPSON)?;
        let model = fit_sldmd(&pack, None)?;
        let mut sup = 0.0f64;
        for x in &test_points {
            let (f, g) = (system.eval(x)?, model.eval(x)?);
            sup = sup.max(f.iter().zip(&g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt());
        }
        println!("{:>4} {sup:>12.3e}", pack.len());
    }
    Ok(())
}
