//! Frequency counts of the three encodings, next to the closed forms
//! `2N + 1`, `3^N` and `4^N − 2^N + 1` (all including ω = 0).

use qclspec::hamiltonians::{EncodingKind, EncodingSpec};
use qclspec::numkernel::hermitian_eigenvalues;
use qclspec::spectral::{default_tolerance, spectrum_stats};

fn closed_form(kind: EncodingKind, n: u32) -> usize {
    match kind {
        EncodingKind::Uniform => 2 * n as usize + 1,
        EncodingKind::Exponential => 3usize.pow(n),
        EncodingKind::NonIntegrable => 4usize.pow(n) - 2usize.pow(n) + 1,
    }
}

fn main() -> qclspec::Result<()> {
    println!("{:<14} {:>2} {:>6} {:>6} {:>9} {:>8}", "encoding", "N", "g", "K", "K_nonzero", "formula");
    for kind in EncodingKind::ALL {
        for n in 1..=5 {
            let h = EncodingSpec::new(kind, n, 7).build()?;
            let e = hermitian_eigenvalues(&h)?;
            let s = spectrum_stats(&e, default_tolerance(&e));
            println!(
                "{:<14} {:>2} {:>6} {:>6} {:>9} {:>8}",
                kind.name(),
                n,
                s.g,
                s.k,
                s.k_nonzero,
                closed_form(kind, n as u32)
            );
        }
    }
    Ok(())
}
