//! Gram matrices, the finite-rank Liouville matrix `G_r⁺ G_d`, and its
//! singular values and singular functions on Duffing data.

use liouville_dmd::dynamics::{generate_dataset, DatasetSpec, EvalGrid};
use liouville_dmd::estimators::{eval_singular_function, singular_triples, Side};
use liouville_dmd::kernel::KernelParams;
use liouville_dmd::operator::GramPack;
use liouville_dmd::trajectory::QuadratureSpec;

fn main() -> liouville_dmd::Result<()> {
    let spec = DatasetSpec {
        grid: EvalGrid::cube(-3.0, 3.0, 2, 7)?,
        ..DatasetSpec::duffing_default()
    };
    let k = KernelParams::new(5.0)?;
    let pack = GramPack::assemble(generate_dataset(&spec)?, k, k, QuadratureSpec::SIMPSON)?;
    println!("M = {} trajectories in dimension {}", pack.len(), pack.dim());
    println!("‖G_r‖_F = {:.4e}, ‖G_d‖_F = {:.4e}", pack.g_r.norm(), pack.g_d.norm());

    let a_f = pack.finite_rank_matrix(None)?;
    println!("‖G_r⁺ G_d‖_F = {:.4e}", a_f.norm());

    let triples = singular_triples(&pack, None)?;
    println!("rank {} of {}", triples.iter().filter(|t| t.sigma > 0.0).count(), triples.len());
    println!("leading singular values of G_r⁺:");
    for (i, t) in triples.iter().take(5).enumerate() {
        println!("  σ{} = {:.6e}", i + 1, t.sigma);
    }

    let x = [0.5, -0.5];
    for (i, t) in triples.iter().take(3).enumerate() {
        let phi = eval_singular_function(&pack, t, Side::Left, &x)?;
        let psi = eval_singular_function(&pack, t, Side::Right, &x)?;
        println!("  φ{0}(x) = {phi:+.6e}  ψ{0}(x) = {psi:+.6e}", i + 1);
    }
    Ok(())
}
