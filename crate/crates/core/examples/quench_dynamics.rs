//! Quench from |000⟩ under a non-integrable Hamiltonian, watching Z on the
//! first qubit: time trace, long-time average, fluctuations and resonances.

use std::f64::consts::TAU;

use qclspec::hamiltonians::{embed_pauli, EncodingSpec, Pauli};
use qclspec::numkernel::StateVector;
use qclspec::thermalization::{
    expectation_trace, long_time_average_analytic, offdiagonal_bound, resonance_count, temporal_fluctuation_analytic,
    temporal_fluctuation_empirical, QuenchSetup, RESONANCE_TOL,
};

fn main() -> qclspec::Result<()> {
    let n = 3;
    let h = EncodingSpec::nonintegrable(n, 4).build()?;
    let setup = QuenchSetup::new(h, StateVector::zero_state(n), embed_pauli(Pauli::Z, 1, n)?)?;

    let times: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
    for (t, a) in times.iter().zip(expectation_trace(&setup, &times)) {
        println!("t = {t:>4.1}  <Z1> = {a:+.6}");
    }

    let avg = long_time_average_analytic(&setup);
    println!("diagonal ensemble {:.6} (degenerate: {})", avg.value, avg.warning.is_some());
    println!("resonances: {}", resonance_count(setup.energies(), RESONANCE_TOL));
    let unit = TAU / setup.min_frequency_gap().expect("non-trivial spectrum");
    println!("sigma^2 analytic  {:.6e}", temporal_fluctuation_analytic(&setup));
    for periods in [1e2, 1e3, 1e4] {
        let v = temporal_fluctuation_empirical(&setup, periods * unit, 20_000)?;
        println!("sigma^2 empirical {v:.6e}  (T = {periods:e} x 2pi/delta_min)");
    }
    println!("bound max|A_ij|^2 {:.6e}", offdiagonal_bound(&setup));
    Ok(())
}
