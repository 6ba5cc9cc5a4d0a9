//! Quench dynamics and long-time statistics of an observable.
//!
//! With `|ψ(0)⟩ = Σ c_i |E_i⟩` and `A_ij = ⟨E_i|Â|E_j⟩`,
//! `⟨Â(t)⟩ = Σ_ij c_i* c_j e^{-i(E_j - E_i)t} A_ij`. Without degeneracies the
//! long-time average is `Σ |c_i|² A_ii`, and without resonances the variance
//! around it is `Σ_{i≠j} |c_i|²|c_j|²|A_ij|²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numkernel::{
    apply, expectation, hermitian_eigendecompose, unitary_exp, ComplexMatrix, HermitianEigenSystem, StateVector,
};
use crate::spectral::frequency_set;
use crate::{Error, Result};

/// Absolute tolerance for degeneracies and resonances.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Minimum horizon, in units of `2π/δ_min`, accepted by the empirical variance.
pub const MIN_HORIZON_PERIODS: f64 = 100.0;

/// Default microcanonical window width as a fraction of the spectral range.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct QuenchSetup {
    hamiltonian: ComplexMatrix,
    initial_state: StateVector,
    observable: ComplexMatrix,
    eig: HermitianEigenSystem,
    coeffs: Vec<Complex64>,
    a_eig: ComplexMatrix,
}

impl QuenchSetup {
    pub fn new(hamiltonian: ComplexMatrix, initial_state: StateVector, observable: ComplexMatrix) -> Result<Self> {
        let dim = hamiltonian.dim();
        for found in [observable.dim(), initial_state.dim()] {
            if found != dim {
                return Err(Error::DimensionMismatch { expected: dim, found });
            }
        }
        observable.ensure_hermitian()?;
        let eig = hermitian_eigendecompose(&hamiltonian)?;
        let coeffs = eig.project(&initial_state)?;
        let a_eig = eig.to_eigenbasis(&observable)?;
        Ok(Self {
            hamiltonian,
            initial_state,
            observable,
            eig,
            coeffs,
            a_eig,
        })
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    pub fn observable(&self) -> &ComplexMatrix {
        &self.observable
    }

    pub fn eigensystem(&self) -> &HermitianEigenSystem {
        &self.eig
    }

    pub fn energies(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    /// `c_i = ⟨E_i|ψ(0)⟩`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `A_ij = ⟨E_i|Â|E_j⟩`.
    pub fn observable_eigenbasis(&self) -> &ComplexMatrix {
        &self.a_eig
    }

    /// Smallest gap between distinct Bohr frequencies, if there are at least two.
    pub fn min_frequency_gap(&self) -> Option<f64> {
        frequency_set(self.energies(), RESONANCE_TOL).min_gap()
    }

    /// `⟨ψ(0)|Ĥ|ψ(0)⟩`.
    pub fn mean_energy(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.energies())
            .map(|(c, e)| c.norm_sqr() * e)
            .sum()
    }

    fn expectation_at(&self, t: f64) -> f64 {
        let v: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(self.energies())
            .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t))
            .collect();
        let n = v.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let row = self.a_eig.row(i);
            let mut inner = Complex64::new(0.0, 0.0);
            for j in 0..n {
                inner += row[j] * v[j];
            }
            acc += v[i].conj() * inner;
        }
        acc.re
    }
}

/// `⟨Â(t)⟩` from the eigenbasis double sum.
pub fn expectation_trace(setup: &QuenchSetup, times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| setup.expectation_at(t)).collect()
}

/// `⟨ψ(t)|Â|ψ(t)⟩` with `ψ(t) = e^{-iĤt} ψ(0)` built explicitly at each time.
pub fn expectation_trace_direct(setup: &QuenchSetup, times: &[f64]) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            let u = unitary_exp(&setup.eig, t);
            let psi = apply(&u, &setup.initial_state)?;
            expectation(&psi, &setup.observable)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongTimeAverage {
    pub value: f64,
    /// Set when the spectrum has degeneracies, in which case `value` is the
    /// diagonal-ensemble sum in an arbitrary eigenbasis and need not equal the
    /// true time average.
    pub warning: Option<Error>,
}

fn degeneracy_collisions(energies: &[f64], tol: f64) -> usize {
    energies.windows(2).filter(|w| w[1] - w[0] <= tol).count()
}

/// Diagonal-ensemble value `Σ |c_i|² A_ii`.
pub fn long_time_average_analytic(setup: &QuenchSetup) -> LongTimeAverage {
    let value = setup
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm_sqr() * setup.a_eig[(i, i)].re)
        .sum();
    let collisions = degeneracy_collisions(setup.energies(), RESONANCE_TOL);
    LongTimeAverage {
        value,
        warning: (collisions > 0).then_some(Error::DegenerateSpectrum { collisions }),
    }
}

/// `Σ_{i≠j} |c_i|² |c_j|² |A_ij|²`.
pub fn temporal_fluctuation_analytic(setup: &QuenchSetup) -> f64 {
    let p: Vec<f64> = setup.coeffs.iter().map(|c| c.norm_sqr()).collect();
    let n = p.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += p[i] * p[j] * setup.a_eig[(i, j)].norm_sqr();
            }
        }
    }
    acc
}

/// `max_{i≠j} |A_ij|²`, an upper bound on the analytic fluctuation.
pub fn offdiagonal_bound(setup: &QuenchSetup) -> f64 {
    let n = setup.a_eig.dim();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                best = best.max(setup.a_eig[(i, j)].norm_sqr());
            }
        }
    }
    best
}

/// `samples` equally spaced times covering `[0, horizon]`.
pub fn sample_times(horizon: f64, samples: usize) -> Vec<f64> {
    let step = horizon / (samples - 1) as f64;
    (0..samples).map(|k| step * k as f64).collect()
}

/// Smallest horizon the empirical variance accepts for this setup.
pub fn required_horizon(setup: &QuenchSetup) -> f64 {
    setup
        .min_frequency_gap()
        .map_or(0.0, |gap| MIN_HORIZON_PERIODS * std::f64::consts::TAU / gap)
}

/// Population variance of `⟨Â(t)⟩` over equally spaced times in `[0, horizon]`.
pub fn temporal_fluctuation_empirical(setup: &QuenchSetup, horizon: f64, samples: usize) -> Result<f64> {
    let required = required_horizon(setup);
    if horizon.is_nan() || horizon < required * (1.0 - 1e-12) {
        return Err(Error::InsufficientHorizon { horizon, required });
    }
    if samples < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 samples, got {samples}")));
    }
    Ok(population_variance(&expectation_trace(setup, &sample_times(horizon, samples))))
}

/// Mean of `⟨Â(t)⟩` over equally spaced times in `[0, horizon]`.
pub fn time_average_empirical(setup: &QuenchSetup, horizon: f64, samples: usize) -> f64 {
    let trace = expectation_trace(setup, &sample_times(horizon, samples.max(2)));
    trace.iter().sum::<f64>() / trace.len() as f64
}

pub(crate) fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Number of unordered pairs of distinct off-diagonal index pairs `(α, β) ≠ (γ, δ)`
/// with `|(E_α − E_β) − (E_γ − E_δ)| ≤ tol`. Zero means non-resonant.
pub fn resonance_count(eigenvalues: &[f64], tol: f64) -> usize {
    let n = eigenvalues.len();
    let mut diffs = Vec::with_capacity(n * n.saturating_sub(1));
    for a in 0..n {
        for b in 0..n {
            if a != b {
                diffs.push(eigenvalues[a] - eigenvalues[b]);
            }
        }
    }
    diffs.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut hi = 0;
    for lo in 0..diffs.len() {
        hi = hi.max(lo + 1);
        while hi < diffs.len() && diffs[hi] - diffs[lo] <= tol {
            hi += 1;
        }
        count += hi - lo - 1;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EthWindow {
    /// Upper edge `E`.
    pub energy: f64,
    /// Width `ΔE`; the window is `[E − ΔE, E]`.
    pub half_width: f64,
}

impl EthWindow {
    pub fn new(energy: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite() && energy.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "window width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Self { energy, half_width })
    }

    pub fn lo(&self) -> f64 {
        self.energy - self.half_width
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.lo() && e <= self.energy
    }

    /// Window of width `fraction` of the spectral range centred on `centre`,
    /// doubled until it holds at least one eigenvalue.
    pub fn centred(eigenvalues: &[f64], centre: f64, fraction: f64) -> Result<Self> {
        let (first, last) = match (eigenvalues.first(), eigenvalues.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::InvalidConfig("empty spectrum".into())),
        };
        let mut width = (fraction * (last - first)).max(f64::MIN_POSITIVE.sqrt());
        loop {
            let w = Self::new(centre + width / 2.0, width)?;
            if eigenvalues.iter().any(|&e| w.contains(e)) {
                return Ok(w);
            }
            width *= 2.0;
        }
    }
}

/// Unweighted mean of `A_ii` over eigenstates with energy in the window.
pub fn microcanonical_from_eigensystem(
    eig: &HermitianEigenSystem,
    a_eig: &ComplexMatrix,
    window: EthWindow,
) -> Result<f64> {
    let (sum, count) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &e)| window.contains(e))
        .fold((0.0, 0usize), |(s, c), (i, _)| (s + a_eig[(i, i)].re, c + 1));
    if count == 0 {
        return Err(Error::EmptyWindow {
            lo: window.lo(),
            hi: window.energy,
        });
    }
    Ok(sum / count as f64)
}

/// Microcanonical average of `Â` for `Ĥ` over the given window.
pub fn microcanonical_expectation(h: &ComplexMatrix, a: &ComplexMatrix, window: EthWindow) -> Result<f64> {
    if a.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: a.dim(),
        });
    }
    a.ensure_hermitian()?;
    let eig = hermitian_eigendecompose(h)?;
    microcanonical_from_eigensystem(&eig, &eig.to_eigenbasis(a)?, window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EthReport {
    pub resonance_count: usize,
    pub sigma2_analytic: f64,
    /// `(horizon, variance)` for each requested horizon.
    pub sigma2_empirical: Vec<(f64, f64)>,
    pub offdiag_bound: f64,
    pub diag_ensemble: f64,
    pub degenerate: bool,
    pub microcanonical: f64,
    pub window: EthWindow,
    pub deviation: f64,
}

/// Runs every diagnostic on one setup. Horizons are given in units of
/// `2π/δ_min`; with no nonzero frequency gap they are taken as absolute times.
pub fn eth_report(setup: &QuenchSetup, horizon_periods: &[f64], samples: usize, window_fraction: f64) -> Result<EthReport> {
    let unit = setup
        .min_frequency_gap()
        .map_or(1.0, |gap| std::f64::consts::TAU / gap);
    let sigma2_empirical = horizon_periods
        .iter()
        .map(|&p| {
            let horizon = p * unit;
            temporal_fluctuation_empirical(setup, horizon, samples).map(|v| (horizon, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let diag = long_time_average_analytic(setup);
    let window = EthWindow::centred(setup.energies(), setup.mean_energy(), window_fraction)?;
    let microcanonical = microcanonical_from_eigensystem(&setup.eig, &setup.a_eig, window)?;
    Ok(EthReport {
        resonance_count: resonance_count(setup.energies(), RESONANCE_TOL),
        sigma2_analytic: temporal_fluctuation_analytic(setup),
        sigma2_empirical,
        offdiag_bound: offdiagonal_bound(setup),
        diag_ensemble: diag.value,
        degenerate: diag.warning.is_some(),
        microcanonical,
        window,
        deviation: (diag.value - microcanonical).abs(),
    })
}
