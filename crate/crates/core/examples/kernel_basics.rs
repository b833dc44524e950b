//! The exponential dot-product kernel and the kernel difference `d = K(·, γ(T)) − K(·, γ(0))`.

use liouville_dmd::kernel::{eval_kernel, eval_kernel_diff, KernelParams};

fn main() -> liouville_dmd::Result<()> {
    let k = KernelParams::new(5.0)?;
    let (x, y) = ([1.0, 2.0], [0.5, -1.0]);
    println!("K(x, y) = {:.12}", eval_kernel(&k, &x, &y)?);
    println!("K(y, x) = {:.12}", eval_kernel(&k, &y, &x)?);
    println!("K(x, x) = {:.12}  (= exp(|x|²/μ))", eval_kernel(&k, &x, &x)?);

    let (start, end) = ([2.0, 0.0], [1.6, -0.4]);
    println!("d(x) for a path {start:?} → {end:?}: {:.12}", eval_kernel_diff(&k, &x, &start, &end)?);

    for mu in [1.0, 5.0, 25.0] {
        let k = KernelParams::new(mu)?;
        println!("μ = {mu:>4}: K(x, y) = {:.6}", eval_kernel(&k, &x, &y)?);
    }
    match KernelParams::new(0.0) {
        Err(e) => println!("μ = 0 rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
