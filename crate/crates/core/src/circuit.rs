//! Variational circuit and the quantum model function.
//!
//! The ansatz is `U(θ) = L_d ⋯ L_2 L_1` with layer
//! `L_k = (⊗_i R^X(θ_{k,i,1}) R^Z(θ_{k,i,2}) R^X(θ_{k,i,3})) · U_rand`, so
//! within each layer the Ising evolution `U_rand = e^{-itH_ansatz}` acts on
//! the state first and layer 1 acts before layer 2. Site `i` of layer `k`
//! reads its three angles from `theta[3·(k·N + i) ..][..3]` (0-based `k`, `i`).
//!
//! The model is `f(x) = <0…0| e^{ixH} U† Z_s U e^{-ixH} |0…0>` with `Z_s` the
//! Pauli Z on the observed site (site 1 by default).

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hamiltonians::{build_ising_ansatz, AnsatzHamiltonianSpec, Prng};
use crate::numkernel::{hermitian_eigendecompose, kron, unitary_exp, ComplexMatrix, HermitianEigenSystem, StateVector};
use crate::spectral::{cluster_frequencies, FrequencySpectrum};
use crate::{Error, Result};

fn default_depth() -> usize {
    3
}
fn default_time() -> f64 {
    1.0
}
fn default_site() -> usize {
    1
}
fn default_range() -> (f64, f64) {
    (-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub n_qubits: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_time")]
    pub evolution_time: f64,
    #[serde(default)]
    pub ansatz_seed: u64,
    /// Interval for the ansatz fields `a_i` and couplings `J_ij`.
    #[serde(default = "default_range")]
    pub ansatz_range: (f64, f64),
    /// 1-based site carrying the measured Z.
    #[serde(default = "default_site")]
    pub observable_site: usize,
}

impl CircuitConfig {
    pub fn new(n_qubits: usize, depth: usize, ansatz_seed: u64) -> Self {
        Self {
            n_qubits,
            depth,
            evolution_time: default_time(),
            ansatz_seed,
            ansatz_range: default_range(),
            observable_site: default_site(),
        }
    }

    pub fn n_params(&self) -> usize {
        3 * self.depth * self.n_qubits
    }

    pub fn ansatz_spec(&self) -> AnsatzHamiltonianSpec {
        AnsatzHamiltonianSpec {
            n_qubits: self.n_qubits,
            seed: self.ansatz_seed,
            range: self.ansatz_range,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ansatz_spec().validate()?;
        if self.depth == 0 {
            return Err(Error::InvalidConfig("depth must be at least 1".into()));
        }
        if !(self.evolution_time.is_finite() && self.evolution_time > 0.0) {
            return Err(Error::InvalidConfig("evolution_time must be positive".into()));
        }
        if self.observable_site == 0 || self.observable_site > self.n_qubits {
            return Err(Error::SiteOutOfRange {
                site: self.observable_site,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }
}

/// Trainable rotation angles, radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub theta: Vec<f64>,
}

impl AnsatzParams {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn zeros(len: usize) -> Self {
        Self { theta: vec![0.0; len] }
    }

    /// Draws every angle from `U[0, 2π)`.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut rng = Prng::new(seed);
        Self {
            theta: (0..len).map(|_| rng.uniform(0.0, TAU)).collect(),
        }
    }
}

pub fn rx(theta: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let ms = Complex64::new(0.0, -s);
    ComplexMatrix::new(2, vec![Complex64::new(c, 0.0), ms, ms, Complex64::new(c, 0.0)]).expect("2x2")
}

pub fn rz(phi: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[
        Complex64::from_polar(1.0, -phi / 2.0),
        Complex64::from_polar(1.0, phi / 2.0),
    ])
}

/// `R^X(θ1)·R^Z(θ2)·R^X(θ3)` as a 2×2 block.
pub fn rotation_block(angles: [f64; 3]) -> ComplexMatrix {
    &(&rx(angles[0]) * &rz(angles[1])) * &rx(angles[2])
}

/// The rotation block on `site`, identity elsewhere.
pub fn u_rot(site: usize, angles: [f64; 3], n_qubits: usize) -> Result<ComplexMatrix> {
    crate::hamiltonians::embed_single(&rotation_block(angles), site, n_qubits)
}

/// `e^{-itH}` for the ansatz generator.
pub fn u_rand(h_ansatz: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(unitary_exp(&hermitian_eigendecompose(h_ansatz)?, t))
}

/// Tensor product of one rotation block per site for layer `layer`.
fn rotation_layer(theta: &[f64], layer: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    let block = |i: usize| {
        let base = 3 * (layer * n_qubits + i);
        rotation_block([theta[base], theta[base + 1], theta[base + 2]])
    };
    let mut out = block(0);
    for i in 1..n_qubits {
        out = kron(&out, &block(i))?;
    }
    Ok(out)
}

/// Assembles `U(θ)` from a precomputed `U_rand`.
pub fn ansatz_from_evolution(theta: &[f64], cfg: &CircuitConfig, evolution: &ComplexMatrix) -> Result<ComplexMatrix> {
    if theta.len() != cfg.n_params() {
        return Err(Error::ParamLengthMismatch {
            expected: cfg.n_params(),
            found: theta.len(),
        });
    }
    let dim = 1usize << cfg.n_qubits;
    if evolution.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: evolution.dim(),
        });
    }
    let mut u = ComplexMatrix::identity(dim);
    for layer in 0..cfg.depth {
        let rot = rotation_layer(theta, layer, cfg.n_qubits)?;
        u = rot.matmul(&evolution.matmul(&u)?)?;
    }
    Ok(u)
}

/// `U(θ)` for the given ansatz generator.
pub fn build_ansatz(params: &AnsatzParams, cfg: &CircuitConfig, h_ansatz: &ComplexMatrix) -> Result<ComplexMatrix> {
    let evolution = u_rand(h_ansatz, cfg.evolution_time)?;
    ansatz_from_evolution(&params.theta, cfg, &evolution)
}

/// A circuit with its fixed random evolution precomputed.
#[derive(Debug, Clone)]
pub struct Ansatz {
    pub config: CircuitConfig,
    pub evolution: ComplexMatrix,
}

impl Ansatz {
    pub fn new(config: CircuitConfig) -> Result<Self> {
        config.validate()?;
        let h = build_ising_ansatz(&config.ansatz_spec())?;
        let evolution = u_rand(&h, config.evolution_time)?;
        Ok(Self { config, evolution })
    }

    pub fn unitary(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        ansatz_from_evolution(theta, &self.config, &self.evolution)
    }
}

/// Diagonal of `Z` on a 1-based site.
pub fn z_signs(site: usize, n_qubits: usize) -> Result<Vec<f64>> {
    if site == 0 || site > n_qubits {
        return Err(Error::SiteOutOfRange { site, n_qubits });
    }
    let bit = 1usize << (n_qubits - site);
    Ok((0..1usize << n_qubits)
        .map(|b| if b & bit == 0 { 1.0 } else { -1.0 })
        .collect())
}

/// The encoding `x ↦ e^{-ixH}|0…0>` plus a measured Pauli Z.
#[derive(Debug, Clone)]
pub struct QuantumModel {
    n_qubits: usize,
    eig: HermitianEigenSystem,
    /// `<E_n|0…0>`.
    zero_components: Vec<Complex64>,
    z_diag: Vec<f64>,
}

impl QuantumModel {
    pub fn new(h_enc: &ComplexMatrix, observable_site: usize) -> Result<Self> {
        let dim = h_enc.dim();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("encoding dimension {dim} is not a power of two")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        let eig = hermitian_eigendecompose(h_enc)?;
        let zero_components = eig.project(&StateVector::zero_state(n_qubits))?;
        let z_diag = z_signs(observable_site, n_qubits)?;
        Ok(Self {
            n_qubits,
            eig,
            zero_components,
            z_diag,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn eigensystem(&self) -> &HermitianEigenSystem {
        &self.eig
    }

    pub fn energies(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    /// `e^{-ixH}|0…0>`.
    pub fn encoded_state(&self, x: f64) -> Vec<Complex64> {
        let n = self.dim();
        let weights: Vec<Complex64> = self
            .eig
            .eigenvalues
            .iter()
            .zip(&self.zero_components)
            .map(|(&e, &a)| Complex64::from_polar(1.0, -x * e) * a)
            .collect();
        let v = &self.eig.eigenvectors;
        (0..n)
            .map(|i| v.row(i).iter().zip(&weights).map(|(a, w)| a * w).sum())
            .collect()
    }

    /// `<φ|U† Z U|φ>` for an already encoded state.
    pub fn measure(&self, u: &ComplexMatrix, encoded: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let amp: Complex64 = u.row(i).iter().zip(encoded).map(|(a, b)| a * b).sum();
            acc += self.z_diag[i] * amp.norm_sqr();
        }
        acc
    }

    pub fn eval(&self, u: &ComplexMatrix, x: f64) -> Result<f64> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        Ok(self.measure(u, &self.encoded_state(x)))
    }

    /// `U† Z U`.
    pub fn measured_operator(&self, u: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let mut zu = u.clone();
        for i in 0..n {
            for j in 0..n {
                zu[(i, j)] *= self.z_diag[i];
            }
        }
        u.adjoint().matmul(&zu).expect("square")
    }

    /// Per-pair Fourier terms `(ω, c)` before clustering, with
    /// `ω = E_m − E_n` and `c = <0|E_n><E_n|U†ZU|E_m><E_m|0>`, so that
    /// `f(x) = Σ c e^{-iωx}`.
    pub fn fourier_terms(&self, u: &ComplexMatrix) -> Result<Vec<(f64, Complex64)>> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        let m = self.eig.to_eigenbasis(&self.measured_operator(u))?;
        let e = &self.eig.eigenvalues;
        let a = &self.zero_components;
        let n = self.dim();
        let mut terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                terms.push((e[j] - e[i], a[i].conj() * m[(i, j)] * a[j]));
            }
        }
        Ok(terms)
    }

    /// Exact Fourier series of the model, frequencies merged at `tol`.
    pub fn exact_fourier(&self, u: &ComplexMatrix, tol: f64) -> Result<FrequencySpectrum> {
        Ok(cluster_frequencies(self.fourier_terms(u)?, tol))
    }

    /// Default clustering tolerance `1e-9·max(1, spectral width)`.
    pub fn default_tol(&self) -> f64 {
        crate::spectral::default_tolerance(self.energies())
    }
}

/// `f(x)` for a raw encoding Hamiltonian, measuring Z on site 1.
pub fn model_eval(h_enc: &ComplexMatrix, u: &ComplexMatrix, x: f64) -> Result<f64> {
    QuantumModel::new(h_enc, 1)?.eval(u, x)
}

/// Exact Fourier decomposition of `f` for a raw encoding Hamiltonian.
pub fn exact_fourier(h_enc: &ComplexMatrix, u: &ComplexMatrix, tol: f64) -> Result<FrequencySpectrum> {
    QuantumModel::new(h_enc, 1)?.exact_fourier(u, tol)
}
