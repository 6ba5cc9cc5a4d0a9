//! One training run: a 3-qubit model with the non-integrable encoding fit to
//! `e^{-10x²}` on `[-1, 1]`, then compared with the target on a coarse grid.

use qclspec::circuit::CircuitConfig;
use qclspec::hamiltonians::EncodingSpec;
use qclspec::training::{gen_dataset, train, CostContext, TargetFunction, TrainSpec};

fn main() -> qclspec::Result<()> {
    let mut spec = TrainSpec::new(
        EncodingSpec::nonintegrable(3, 2),
        CircuitConfig::new(3, 3, 2),
        TargetFunction::gaussian(),
        9,
    );
    spec.dataset_size = 50;
    let result = train(&spec)?;
    println!(
        "cost {:.4e} -> {:.4e} after {} evaluations",
        result.cost_initial, result.cost_final, result.evaluations
    );

    let grid = gen_dataset(&spec.target, 11, (-1.0, 1.0))?;
    let ctx = CostContext::from_specs(&spec.encoding, &spec.circuit, &grid)?;
    let fitted = ctx.predictions(&result.theta_opt.theta)?;
    println!("{:>6} {:>10} {:>10}", "x", "target", "model");
    for (&(x, y), f) in grid.pairs.iter().zip(fitted) {
        println!("{x:>6.2} {y:>10.5} {f:>10.5}");
    }
    Ok(())
}
