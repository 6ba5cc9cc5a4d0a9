//! Mean adjacent-gap ratio of the non-integrable encoding Hamiltonian as the
//! register grows. Poisson statistics give about 0.386, GUE about 0.600.

use qclspec::hamiltonians::EncodingSpec;
use qclspec::numkernel::hermitian_eigenvalues;
use qclspec::spectral::spacing_ratio;

fn main() -> qclspec::Result<()> {
    let max_n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    for n in 3..=max_n {
        let seeds = if n <= 6 { 10 } else { 2 };
        let ratios = (0..seeds)
            .map(|seed| spacing_ratio(&hermitian_eigenvalues(&EncodingSpec::nonintegrable(n, seed).build()?)?))
            .collect::<qclspec::Result<Vec<_>>>()?;
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        println!("N={n:>2}  dim={:>5}  <r> = {mean:.4}  over {seeds} seeds", 1 << n);
    }
    Ok(())
}
