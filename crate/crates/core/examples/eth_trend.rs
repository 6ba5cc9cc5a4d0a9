//! Diagonal-ensemble value against the microcanonical average over the
//! middle third of the spectrum, for growing system sizes.

use qclspec::hamiltonians::{embed_pauli, EncodingSpec, Pauli};
use qclspec::numkernel::StateVector;
use qclspec::thermalization::{long_time_average_analytic, microcanonical_from_eigensystem, EthWindow, QuenchSetup};
use qclspec::Error;

fn main() -> qclspec::Result<()> {
    println!("{:>2} {:>12} {:>12} {:>12} {:>6}", "N", "diagonal", "micro", "deviation", "seeds");
    for n in 3..=6 {
        let mut deviations = Vec::new();
        for seed in 0..10 {
            let h = EncodingSpec::nonintegrable(n, seed).build()?;
            let setup = QuenchSetup::new(h, StateVector::zero_state(n), embed_pauli(Pauli::Z, 1, n)?)?;
            let e = setup.energies();
            let third = (e[e.len() - 1] - e[0]) / 3.0;
            let window = EthWindow::new(e[0] + 2.0 * third, third)?;
            // Small registers can leave the middle third empty.
            let micro = match microcanonical_from_eigensystem(setup.eigensystem(), setup.observable_eigenbasis(), window) {
                Ok(v) => v,
                Err(Error::EmptyWindow { .. }) => continue,
                Err(e) => return Err(e),
            };
            let diag = long_time_average_analytic(&setup).value;
            deviations.push((diag, micro, (diag - micro).abs()));
        }
        let mean = |f: fn(&(f64, f64, f64)) -> f64| deviations.iter().map(f).sum::<f64>() / deviations.len() as f64;
        println!(
            "{n:>2} {:>12.5} {:>12.5} {:>12.5} {:>6}",
            mean(|d| d.0),
            mean(|d| d.1),
            mean(|d| d.2),
            deviations.len()
        );
    }
    Ok(())
}
