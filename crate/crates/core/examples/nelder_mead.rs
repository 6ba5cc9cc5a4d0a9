//! The simplex optimizer on its own, minimising the Rosenbrock function.

use qclspec::training::{nelder_mead, OptimizerConfig};

fn main() -> qclspec::Result<()> {
    let rosenbrock = |v: &[f64]| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2);
    let r = nelder_mead(rosenbrock, &[-1.2, 1.0], &OptimizerConfig::default())?;
    println!(
        "minimum near ({:.6}, {:.6}), f = {:.3e}, {} evaluations, {} iterations, converged: {}",
        r.x[0], r.x[1], r.f_final, r.evaluations, r.iterations, r.converged
    );
    for (i, f) in r.trace.iter().enumerate().step_by(10) {
        println!("iter {i:>4}  best {f:.3e}");
    }
    Ok(())
}
