//! Expressivity diagnostics.
//!
//! `G` counts distinct eigenvalues, `K = |Ω|` counts distinct eigenvalue
//! differences with `ω = 0` included, and `K_nonzero = K − 1`. DFT peak
//! counting samples the model on a window derived from the exact spectrum and
//! applies a Kaiser taper so that leakage stays far below the peak threshold.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::circuit::QuantumModel;
use crate::numkernel::ComplexMatrix;
use crate::{Error, Result};

/// Absolute collision threshold for level spacings.
pub const SPACING_COLLISION_TOL: f64 = 1e-12;

/// Default relative threshold above which a DFT bin or Fourier coefficient
/// counts as a peak.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 1e-6;

/// `1e-9·max(1, E_max − E_min)`.
pub fn default_tolerance(eigenvalues: &[f64]) -> f64 {
    let width = match (eigenvalues.first(), eigenvalues.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    1e-9 * width.max(1.0)
}

/// Number of clusters in ascending `values` separated by gaps larger than `tol`.
pub fn distinct_count(values: &[f64], tol: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    1 + values.windows(2).filter(|w| w[1] - w[0] > tol).count()
}

/// Fourier series `f(x) = Σ c_ω e^{-iωx}` with merged frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySpectrum {
    /// `(ω, c_ω)`, strictly increasing in `ω`.
    pub entries: Vec<(f64, Complex64)>,
    pub tol: f64,
}

impl FrequencySpectrum {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.entries
            .iter()
            .map(|&(w, c)| c * Complex64::from_polar(1.0, -w * x))
            .sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm()).fold(0.0, f64::max)
    }

    /// Frequencies whose coefficient exceeds `rel_threshold·max|c|`.
    pub fn count_above(&self, rel_threshold: f64) -> usize {
        self.count_above_abs(rel_threshold * self.max_abs_coeff())
    }

    pub fn count_above_abs(&self, threshold: f64) -> usize {
        self.entries.iter().filter(|e| e.1.norm() > threshold).count()
    }

    /// Every `ω` has a partner `−ω` with conjugate coefficient.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let n = self.entries.len();
        (0..n).all(|k| {
            let (w, c) = self.entries[k];
            let (w2, c2) = self.entries[n - 1 - k];
            (w + w2).abs() <= self.tol.max(1e-12) && (c - c2.conj()).norm() <= tol
        })
    }
}

/// Sorts `(ω, c)` terms and merges runs whose consecutive gaps are within
/// `tol`. The merged frequency is the cluster mean, the coefficient the sum.
pub fn cluster_frequencies(mut terms: Vec<(f64, Complex64)>, tol: f64) -> FrequencySpectrum {
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut entries: Vec<(f64, Complex64)> = Vec::new();
    let mut start = 0;
    for k in 0..terms.len() {
        let last = k + 1 == terms.len() || terms[k + 1].0 - terms[k].0 > tol;
        if last {
            let run = &terms[start..=k];
            let w = run.iter().map(|t| t.0).sum::<f64>() / run.len() as f64;
            let c = run.iter().map(|t| t.1).sum();
            entries.push((w, c));
            start = k + 1;
        }
    }
    FrequencySpectrum { entries, tol }
}

/// The frequency set `Ω` of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    /// Ascending, symmetric about zero, containing zero.
    pub omegas: Vec<f64>,
}

impl FrequencySet {
    pub fn k(&self) -> usize {
        self.omegas.len()
    }

    pub fn k_nonzero(&self) -> usize {
        self.omegas.len() - 1
    }

    pub fn max_abs(&self) -> f64 {
        self.omegas.last().copied().unwrap_or(0.0)
    }

    /// Smallest gap between consecutive distinct frequencies; `None` when `Ω = {0}`.
    pub fn min_gap(&self) -> Option<f64> {
        self.omegas.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }
}

/// Distinct differences `E_m − E_n` of ascending eigenvalues, clustered at `tol`.
pub fn frequency_set(eigenvalues: &[f64], tol: f64) -> FrequencySet {
    let n = eigenvalues.len();
    let mut positive = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            positive.push(eigenvalues[j] - eigenvalues[i]);
        }
    }
    positive.sort_by(f64::total_cmp);

    let mut reps: Vec<f64> = Vec::new();
    let mut prev = 0.0;
    let mut cluster: Vec<f64> = Vec::new();
    let mut in_zero = true;
    for &d in &positive {
        if d - prev > tol {
            if !in_zero && !cluster.is_empty() {
                reps.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            }
            cluster.clear();
            in_zero = false;
        }
        if !in_zero {
            cluster.push(d);
        }
        prev = d;
    }
    if !in_zero && !cluster.is_empty() {
        reps.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    }

    let mut omegas: Vec<f64> = reps.iter().rev().map(|w| -w).collect();
    omegas.push(0.0);
    omegas.extend(reps);
    FrequencySet { omegas }
}

/// Mean ratio `min(s_i, s_{i+1}) / max(s_i, s_{i+1})` of consecutive level spacings.
pub fn spacing_ratio(eigenvalues: &[f64]) -> Result<f64> {
    if eigenvalues.len() < 4 {
        return Err(Error::InvalidConfig(format!(
            "spacing ratio needs at least 4 eigenvalues, got {}",
            eigenvalues.len()
        )));
    }
    let spacings: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    let collisions = spacings.iter().filter(|&&s| s < SPACING_COLLISION_TOL).count();
    if collisions > 0 {
        return Err(Error::DegenerateSpectrum { collisions });
    }
    let ratios: Vec<f64> = spacings.windows(2).map(|s| s[0].min(s[1]) / s[0].max(s[1])).collect();
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumStats {
    pub g: usize,
    pub k: usize,
    pub k_nonzero: usize,
    /// `None` when there are fewer than four levels or coincident levels.
    pub mean_spacing_ratio: Option<f64>,
    /// Number of level spacings below the collision threshold.
    pub spacing_collisions: usize,
}

pub fn spectrum_stats(eigenvalues: &[f64], tol: f64) -> SpectrumStats {
    let set = frequency_set(eigenvalues, tol);
    let (mean_spacing_ratio, spacing_collisions) = match spacing_ratio(eigenvalues) {
        Ok(r) => (Some(r), 0),
        Err(Error::DegenerateSpectrum { collisions }) => (None, collisions),
        Err(_) => (None, 0),
    };
    SpectrumStats {
        g: distinct_count(eigenvalues, tol),
        k: set.k(),
        k_nonzero: set.k_nonzero(),
        mean_spacing_ratio,
        spacing_collisions,
    }
}

/// Sampling grid for the DFT: `n_samples` points `x_k = k·window/n_samples`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DftPlan {
    pub n_samples: usize,
    pub window: f64,
}

/// Kaiser shape parameter of the taper; sidelobes sit near −150 dB.
pub const KAISER_BETA: f64 = 16.0;
/// DFT bins placed between the two closest frequencies by [`DftPlan::derive`].
pub const BINS_PER_GAP: f64 = 16.0;
/// Fewest bins between the two closest frequencies that still resolves both.
pub const MIN_BINS_PER_GAP: f64 = 12.0;
/// Largest sample count [`DftPlan::derive`] will propose.
pub const DEFAULT_MAX_SAMPLES: usize = 1 << 23;

impl DftPlan {
    /// Picks a window giving [`BINS_PER_GAP`] bins across the smallest
    /// frequency gap and a power-of-two sample count with a ×2 Nyquist margin.
    pub fn derive(set: &FrequencySet, max_samples: usize) -> Result<Self> {
        let Some(gap) = set.min_gap() else {
            // Constant model: any short window resolves Ω = {0}.
            return Ok(Self {
                n_samples: 64,
                window: TAU,
            });
        };
        let window = TAU * BINS_PER_GAP / gap;
        let span_bins = set.max_abs() * window / TAU;
        let needed = (4.0 * span_bins + 4.0 * BINS_PER_GAP).ceil();
        if !needed.is_finite() || needed > max_samples as f64 {
            return Err(Error::ResolutionInsufficient {
                reason: format!("smallest frequency gap {gap:e} needs more than {max_samples} samples"),
            });
        }
        Ok(Self {
            n_samples: (needed as usize).next_power_of_two(),
            window,
        })
    }

    /// Checks that the grid separates every pair in `set` and has no aliasing.
    pub fn validate(&self, set: &FrequencySet) -> Result<()> {
        if self.n_samples < 4 || !(self.window.is_finite() && self.window > 0.0) {
            return Err(Error::ResolutionInsufficient {
                reason: "need at least 4 samples and a positive window".into(),
            });
        }
        if let Some(gap) = set.min_gap() {
            let bins_per_gap = gap * self.window / TAU;
            if bins_per_gap < MIN_BINS_PER_GAP {
                return Err(Error::ResolutionInsufficient {
                    reason: format!(
                        "window {} gives {bins_per_gap:.2} bins across the smallest gap {gap:e}; need {MIN_BINS_PER_GAP}",
                        self.window
                    ),
                });
            }
        }
        let half_span = set.max_abs() * self.window / TAU + MIN_BINS_PER_GAP;
        if 2.0 * half_span >= self.n_samples as f64 {
            return Err(Error::ResolutionInsufficient {
                reason: format!(
                    "{} samples alias frequencies up to {}",
                    self.n_samples,
                    set.max_abs()
                ),
            });
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        TAU / self.window
    }
}

/// Magnitudes of the tapered DFT of `f`, one entry per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DftSpectrum {
    /// `(ω_bin, |X|)` with `ω_bin = 2πj/window`, ascending in `ω_bin`.
    /// A tone `c e^{-iωx}` shows up with magnitude close to `|c|` at `ω_bin ≈ ω`.
    pub bins: Vec<(f64, f64)>,
    pub plan: DftPlan,
}

impl DftSpectrum {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.1).collect()
    }

    pub fn peak_count(&self, rel_threshold: f64) -> usize {
        count_peaks(&self.magnitudes(), rel_threshold)
    }

    /// Frequencies of the counted peaks.
    pub fn peak_frequencies(&self, rel_threshold: f64) -> Vec<f64> {
        peak_indices(&self.magnitudes(), rel_threshold)
            .into_iter()
            .map(|i| self.bins[i].0)
            .collect()
    }
}

fn bessel_i0(x: f64) -> f64 {
    let q = (x / 2.0).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

pub(crate) fn kaiser_window(n: usize, beta: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let norm = bessel_i0(beta);
    (0..n)
        .map(|k| {
            let r = 2.0 * k as f64 / (n - 1) as f64 - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / norm
        })
        .collect()
}

/// Tapered DFT of real samples `f(x_k)`, returned on signed frequency bins.
pub fn dft_of_samples(samples: &[f64], plan: DftPlan) -> DftSpectrum {
    let m = samples.len();
    let taper = kaiser_window(m, KAISER_BETA);
    let gain: f64 = taper.iter().sum();
    let mut buf: Vec<Complex64> = samples
        .iter()
        .zip(&taper)
        .map(|(&f, &w)| Complex64::new(f * w, 0.0))
        .collect();
    // e^{-iωx_k} lines up with e^{+2πijk/M} at ω = 2πj/window: inverse transform.
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let dw = TAU / plan.window;
    let half = m / 2;
    let bins = (0..m)
        .map(|r| {
            // Rotate so that bins run from -(M/2 - 1) up to M/2.
            let j = (r + half + 1) % m;
            let signed = if j > half { j as f64 - m as f64 } else { j as f64 };
            (signed * dw, buf[j].norm() / gain)
        })
        .collect();
    DftSpectrum { bins, plan }
}

/// Samples the model on the plan's grid and takes the tapered DFT.
///
/// Fails with `ResolutionInsufficient` if the plan cannot separate the exact
/// frequency set of the encoding.
pub fn dft_spectrum(model: &QuantumModel, u: &ComplexMatrix, plan: DftPlan) -> Result<DftSpectrum> {
    let set = frequency_set(model.energies(), default_tolerance(model.energies()));
    plan.validate(&set)?;
    let samples = sample_model(model, u, plan)?;
    Ok(dft_of_samples(&samples, plan))
}

/// Derives a plan from the encoding spectrum and runs [`dft_spectrum`].
pub fn dft_spectrum_auto(model: &QuantumModel, u: &ComplexMatrix, max_samples: usize) -> Result<DftSpectrum> {
    let set = frequency_set(model.energies(), default_tolerance(model.energies()));
    let plan = DftPlan::derive(&set, max_samples)?;
    dft_spectrum(model, u, plan)
}

fn sample_model(model: &QuantumModel, u: &ComplexMatrix, plan: DftPlan) -> Result<Vec<f64>> {
    if u.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: u.dim(),
        });
    }
    let m = plan.n_samples;
    let step = plan.window / m as f64;
    let samples: Vec<f64> = (0..m)
        .into_par_iter()
        .with_min_len(4096)
        .map(|k| model.measure(u, &model.encoded_state(k as f64 * step)))
        .collect();
    Ok(samples)
}

fn peak_indices(magnitudes: &[f64], rel_threshold: f64) -> Vec<usize> {
    let n = magnitudes.len();
    let max = magnitudes.iter().copied().fold(0.0, f64::max);
    let threshold = rel_threshold * max;
    if n == 0 || max <= 0.0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![0];
    }
    (0..n)
        .filter(|&i| {
            let m = magnitudes[i];
            let left = magnitudes[(i + n - 1) % n];
            let right = magnitudes[(i + 1) % n];
            m > threshold && m > left && m >= right
        })
        .collect()
}

/// Local maxima (circular neighbours; plateaus count once) above
/// `rel_threshold·max`.
pub fn count_peaks(magnitudes: &[f64], rel_threshold: f64) -> usize {
    peak_indices(magnitudes, rel_threshold).len()
}
