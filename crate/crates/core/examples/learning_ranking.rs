//! Trains a 4-qubit model on two targets with each encoding and compares
//! the median final cost over five starting points.
//!
//! `cargo run --release --example learning_ranking -- [max_evals] [restarts] [dataset_size]`

use qclspec::circuit::CircuitConfig;
use qclspec::hamiltonians::{EncodingKind, EncodingSpec};
use qclspec::training::{train, TargetFunction, TrainSpec};
use rayon::prelude::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() -> qclspec::Result<()> {
    let mut args = std::env::args().skip(1);
    let max_evals: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let restarts: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let dataset_size: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let seeds: Vec<u64> = (1..=5).collect();
    for target in [TargetFunction::gaussian(), TargetFunction::triangle()] {
        println!("target {}", target.name());
        for kind in EncodingKind::ALL {
            let start = std::time::Instant::now();
            let costs = seeds
                .par_iter()
                .map(|&seed| {
                    let mut spec = TrainSpec::new(
                        EncodingSpec::new(kind, 4, 1),
                        CircuitConfig::new(4, 3, 1),
                        target.clone(),
                        seed,
                    );
                    spec.optimizer.max_evals = max_evals;
                    spec.optimizer.max_iters = max_evals;
                    spec.restarts = restarts;
                    spec.dataset_size = dataset_size;
                    train(&spec).map(|r| r.cost_final)
                })
                .collect::<qclspec::Result<Vec<_>>>()?;
            println!(
                "  {:<14} median {:.3e}  runs {:?}  ({:.1?})",
                kind.name(),
                median(costs.clone()),
                costs.iter().map(|c| format!("{c:.2e}")).collect::<Vec<_>>(),
                start.elapsed()
            );
        }
    }
    Ok(())
}
