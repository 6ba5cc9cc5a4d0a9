//! Counts Fourier components of a randomly initialised model two ways:
//! from the exact eigen-expansion and from peaks of a windowed DFT of samples.

use qclspec::circuit::{Ansatz, AnsatzParams, CircuitConfig, QuantumModel};
use qclspec::hamiltonians::EncodingSpec;
use qclspec::spectral::{dft_spectrum_auto, frequency_set, DEFAULT_MAX_SAMPLES, DEFAULT_PEAK_THRESHOLD};

fn main() -> qclspec::Result<()> {
    for n in 1..=3 {
        let model = QuantumModel::new(&EncodingSpec::nonintegrable(n, 11).build()?, 1)?;
        let cfg = CircuitConfig::new(n, 3, 5);
        let theta = AnsatzParams::random(cfg.n_params(), 42);
        let u = Ansatz::new(cfg)?.unitary(&theta.theta)?;

        let exact = model.exact_fourier(&u, model.default_tol())?;
        let dft = dft_spectrum_auto(&model, &u, DEFAULT_MAX_SAMPLES)?;
        let k = frequency_set(model.energies(), model.default_tol()).k();
        println!(
            "N={n}: K={k}, exact components above threshold {}, DFT peaks {} ({} samples over x in [0, {:.1}))",
            exact.count_above(DEFAULT_PEAK_THRESHOLD),
            dft.peak_count(DEFAULT_PEAK_THRESHOLD),
            dft.plan.n_samples,
            dft.plan.window
        );
        let x = 0.3;
        println!(
            "     f({x}) = {:.12}, series = {:.12}",
            model.eval(&u, x)?,
            exact.evaluate(x).re
        );
    }
    Ok(())
}
