//! Dense building blocks: Pauli strings, eigendecomposition and exact
//! time evolution of a small spin chain.

use qclspec::hamiltonians::{Pauli, PauliSum};
use qclspec::numkernel::{apply, expectation, hermitian_eigendecompose, unitary_exp, StateVector};

fn main() -> qclspec::Result<()> {
    let n = 4;
    let mut sum = PauliSum::new(n);
    for i in 1..n {
        sum.add(1.0, &[(Pauli::X, i), (Pauli::X, i + 1)])?;
        sum.add(1.0, &[(Pauli::Y, i), (Pauli::Y, i + 1)])?;
        sum.add(0.5, &[(Pauli::Z, i), (Pauli::Z, i + 1)])?;
    }
    sum.add(0.3, &[(Pauli::Z, 1)])?;
    let h = sum.to_matrix();

    let eig = hermitian_eigendecompose(&h)?;
    println!("energies: {:.4?}", eig.eigenvalues);
    println!("reconstruction error {:.2e}", eig.reconstruct().max_abs_diff(&h));

    let u = unitary_exp(&eig, 0.8);
    println!("unitarity error {:.2e}", u.unitarity_deviation());
    let psi = apply(&u, &StateVector::basis(1 << n, 0b1000))?;
    println!("norm after evolution {:.15}", psi.norm());
    println!("energy {:.6} (conserved)", expectation(&psi, &h)?);
    Ok(())
}
