//! Quantum circuit learning with Hamiltonian data encodings.
//!
//! The crate simulates the variational model
//! `f(x) = <0..0| e^{ixH} U(θ)† Z U(θ) e^{-ixH} |0..0>` exactly with dense
//! linear algebra, and provides the tools needed to study how the choice of
//! encoding Hamiltonian `H` shapes the model:
//!
//! - [`numkernel`]: dense complex matrices, Hermitian eigendecomposition,
//!   unitary exponentials.
//! - [`hamiltonians`]: uniform, exponential and non-integrable encoding
//!   Hamiltonians plus the transverse-field Ising ansatz generator, all built
//!   from a seeded, platform-independent random stream.
//! - [`circuit`]: rotation gates, the layered ansatz and the model function
//!   with its exact Fourier decomposition.
//! - [`spectral`]: eigenvalue and frequency counting, DFT peak counting and
//!   level-spacing ratios.
//! - [`training`]: datasets, the squared-error cost and a Nelder-Mead optimizer.
//! - [`thermalization`]: quench dynamics, long-time averages, temporal
//!   fluctuations, resonance counting and microcanonical averages.
//! - [`cli`]: JSON-configured batch experiments writing CSV/JSON outputs,
//!   driven by the `qclspec` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod circuit;
pub mod cli;
mod error;
pub mod hamiltonians;
pub mod numkernel;
pub mod spectral;
pub mod thermalization;
pub mod training;

pub use error::{Error, Result};
pub use num_complex::Complex64;
