//! Batch experiment runner.
//!
//! Every subcommand reads a JSON config, runs one job per (encoding, N, seed)
//! combination, writes CSV/JSON data files and finishes with `manifest.json`.
//! Data files depend only on the config; the manifest also records timings.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{Ansatz, AnsatzParams, CircuitConfig, QuantumModel};
use crate::hamiltonians::{embed_pauli, CouplingGraph, EncodingKind, EncodingSpec, Pauli, DEFAULT_DELTA, MAX_QUBITS};
use crate::numkernel::{hermitian_eigenvalues, StateVector};
use crate::spectral::{
    default_tolerance, dft_spectrum_auto, frequency_set, spectrum_stats, DEFAULT_MAX_SAMPLES, DEFAULT_PEAK_THRESHOLD,
};
use crate::thermalization::{eth_report, QuenchSetup, DEFAULT_WINDOW_FRACTION};
use crate::training::{train, CostContext, OptimizerConfig, TargetFunction, TrainSpec};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qclspec", version, about = "Quantum circuit learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frequency counts and level statistics of encoding Hamiltonians.
    Spectrum(CommonArgs),
    /// DFT peak counting of models with random angles.
    Fourier(CommonArgs),
    /// Regression training with Nelder-Mead.
    Train(TrainArgs),
    /// Quench dynamics and thermalization diagnostics.
    Eth(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Extra optimizer runs from fresh angles; overrides the config.
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical { seed: u64, context: String, source: Error },
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numerical { .. } => EXIT_NUMERICAL,
            Self::Io { .. } => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "config error: {msg}"),
            Self::Numerical { seed, context, source } => {
                write!(f, "numerical error for seed {seed} ({context}): {source}")
            }
            Self::Io { path, source } => write!(f, "i/o error on {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn numerical(seed: u64, context: impl Into<String>) -> impl FnOnce(Error) -> CliError {
    let context = context.into();
    move |source| match source {
        Error::InvalidConfig(msg) => CliError::Config(msg),
        source => CliError::Numerical { seed, context, source },
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub encodings: Vec<EncodingKind>,
    pub n_qubits: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Frequency merge tolerance; defaults to `1e-9·max(1, spectral width)`.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub coupling_graph: CouplingGraph,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierConfig {
    pub encodings: Vec<EncodingKind>,
    pub n_qubits: Vec<usize>,
    /// Each seed drives both the encoding draw and the random angles.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub ansatz_seed: u64,
    #[serde(default = "default_threshold")]
    pub peak_threshold: f64,
    #[serde(default = "default_max_samples")]
    pub max_samples: usize,
    /// Write every DFT bin, or only the detected peaks.
    #[serde(default = "default_true")]
    pub write_bins: bool,
    /// Also write the exact `(ω, |c_ω|)` series.
    #[serde(default = "default_true")]
    pub exact_sidecar: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_depth() -> usize {
    3
}
fn default_threshold() -> f64 {
    DEFAULT_PEAK_THRESHOLD
}
fn default_max_samples() -> usize {
    DEFAULT_MAX_SAMPLES
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub encodings: Vec<EncodingSpec>,
    pub circuit: CircuitConfig,
    pub target: TargetFunction,
    #[serde(default = "default_dataset_size")]
    pub dataset_size: usize,
    #[serde(default = "default_range")]
    pub dataset_range: (f64, f64),
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Seeds for the starting angles, one run each.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub restarts: usize,
    /// Grid size of the fitted-curve CSV.
    #[serde(default = "default_fit_points")]
    pub fit_points: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_dataset_size() -> usize {
    100
}
fn default_range() -> (f64, f64) {
    (-1.0, 1.0)
}
fn default_fit_points() -> usize {
    201
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObservableSpec {
    /// Pauli Z on a site (1-based).
    Z { site: usize },
    /// The encoding Hamiltonian itself.
    Hamiltonian,
}

impl Default for ObservableSpec {
    fn default() -> Self {
        Self::Z { site: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialStateSpec {
    /// `|0…0⟩`.
    #[default]
    Zero,
    /// Computational basis state with the given index.
    Basis { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EthConfig {
    pub encodings: Vec<EncodingKind>,
    pub n_qubits: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub observable: ObservableSpec,
    #[serde(default)]
    pub initial_state: InitialStateSpec,
    /// Horizons for the empirical variance, in units of `2π/δ_min`.
    #[serde(default = "default_horizons")]
    pub horizons: Vec<f64>,
    #[serde(default = "default_eth_samples")]
    pub samples: usize,
    #[serde(default = "default_window_fraction")]
    pub window_fraction: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_horizons() -> Vec<f64> {
    vec![1e2, 1e3, 1e4]
}
fn default_eth_samples() -> usize {
    20_000
}
fn default_window_fraction() -> f64 {
    DEFAULT_WINDOW_FRACTION
}

fn check_lists(encodings: usize, sizes: &[usize], seeds: usize) -> Result<(), CliError> {
    if encodings == 0 || sizes.is_empty() || seeds == 0 {
        return Err(config_err("encodings, n_qubits and seeds must be non-empty"));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n == 0 || n > MAX_QUBITS) {
        return Err(config_err(format!("n_qubits {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

impl SpectrumConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_lists(self.encodings.len(), &self.n_qubits, self.seeds.len())?;
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(config_err("tolerance must be positive"));
            }
        }
        Ok(())
    }
}

impl FourierConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_lists(self.encodings.len(), &self.n_qubits, self.seeds.len())?;
        if self.depth == 0 {
            return Err(config_err("depth must be at least 1"));
        }
        if !(self.peak_threshold > 0.0 && self.peak_threshold < 1.0) {
            return Err(config_err("peak_threshold must lie in (0, 1)"));
        }
        Ok(())
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.encodings.is_empty() || self.seeds.is_empty() {
            return Err(config_err("encodings and seeds must be non-empty"));
        }
        if self.fit_points < 2 {
            return Err(config_err("fit_points must be at least 2"));
        }
        for enc in &self.encodings {
            self.spec(enc, 0).validate().map_err(config_err)?;
        }
        Ok(())
    }

    fn spec(&self, encoding: &EncodingSpec, seed: u64) -> TrainSpec {
        TrainSpec {
            encoding: encoding.clone(),
            circuit: self.circuit.clone(),
            target: self.target.clone(),
            dataset_size: self.dataset_size,
            dataset_range: self.dataset_range,
            optimizer: self.optimizer.clone(),
            init_seed: seed,
            restarts: self.restarts,
        }
    }
}

impl EthConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_lists(self.encodings.len(), &self.n_qubits, self.seeds.len())?;
        if self.samples < 2 {
            return Err(config_err("samples must be at least 2"));
        }
        if self.horizons.iter().any(|&h| !(h >= 100.0 && h.is_finite())) {
            return Err(config_err("horizons are in units of 2π/δ_min and must be at least 100"));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction.is_finite()) {
            return Err(config_err("window_fraction must be positive"));
        }
        for &n in &self.n_qubits {
            match self.observable {
                ObservableSpec::Z { site } if site == 0 || site > n => {
                    return Err(config_err(format!("observable site {site} outside 1..={n}")));
                }
                _ => {}
            }
            if let InitialStateSpec::Basis { index } = self.initial_state {
                if index >= 1 << n {
                    return Err(config_err(format!("basis index {index} outside a {n}-qubit register")));
                }
            }
        }
        Ok(())
    }
}

/// Reads a config, rejecting unknown keys. Returns it with the SHA-256 of the raw bytes.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<(T, String), CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config = serde_json::from_slice(&bytes).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    Ok((config, hex::encode(Sha256::digest(&bytes))))
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(bytes).map_err(io)?;
    file.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub seed: u64,
    pub files: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_path: PathBuf,
    pub config_sha256: String,
    pub summary_files: Vec<PathBuf>,
    pub runs: Vec<RunRecord>,
    pub wall_clock_seconds: f64,
}

struct RunOutput {
    label: String,
    seed: u64,
    files: Vec<(String, Vec<u8>)>,
    rows: Vec<Vec<String>>,
    seconds: f64,
}

struct Job<T> {
    label: String,
    seed: u64,
    item: T,
}

fn run_jobs<T, F>(jobs: Vec<Job<T>>, threads: usize, f: F) -> Result<Vec<RunOutput>, CliError>
where
    T: Send + Sync,
    F: Fn(&Job<T>) -> Result<(Vec<(String, Vec<u8>)>, Vec<Vec<String>>), CliError> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(config_err)?;
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                log::info!("starting {}", job.label);
                let start = Instant::now();
                let (files, rows) = f(job)?;
                let seconds = start.elapsed().as_secs_f64();
                log::info!("finished {} in {seconds:.2}s", job.label);
                Ok(RunOutput {
                    label: job.label.clone(),
                    seed: job.seed,
                    files,
                    rows,
                    seconds,
                })
            })
            .collect()
    })
}

fn finish(
    command: &str,
    args: &CommonArgs,
    config_dir: Option<&PathBuf>,
    hash: String,
    summary: (&str, &[&str]),
    outputs: Vec<RunOutput>,
    started: Instant,
) -> Result<RunManifest, CliError> {
    let dir = args
        .out
        .clone()
        .or_else(|| config_dir.cloned())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut runs = Vec::with_capacity(outputs.len());
    let mut rows = Vec::new();
    for out in outputs {
        let mut files = Vec::new();
        for (name, bytes) in &out.files {
            let path = dir.join(name);
            write_atomic(&path, bytes)?;
            files.push(path);
        }
        rows.extend(out.rows);
        runs.push(RunRecord {
            label: out.label,
            seed: out.seed,
            files,
            wall_clock_seconds: out.seconds,
        });
    }
    let summary_path = dir.join(summary.0);
    write_atomic(&summary_path, &csv_bytes(summary.1, &rows))?;
    let manifest = RunManifest {
        command: command.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_path: args.config.clone(),
        config_sha256: hash,
        summary_files: vec![summary_path],
        runs,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(&dir.join("manifest.json"), &json)?;
    Ok(manifest)
}

fn encoding_spec(kind: EncodingKind, n: usize, seed: u64) -> EncodingSpec {
    EncodingSpec::new(kind, n, seed)
}

fn grid<'a>(kinds: &'a [EncodingKind], sizes: &'a [usize], seeds: &'a [u64]) -> impl Iterator<Item = (EncodingKind, usize, u64)> + 'a {
    kinds
        .iter()
        .flat_map(move |&k| sizes.iter().flat_map(move |&n| seeds.iter().map(move |&s| (k, n, s))))
}

pub const SPECTRUM_HEADER: &[&str] = &[
    "encoding",
    "n_qubits",
    "seed",
    "distinct_energies",
    "k_including_zero",
    "k_nonzero",
    "mean_spacing_ratio",
    "spacing_collisions",
    "tolerance_energy_units",
];

pub fn cmd_spectrum(args: &CommonArgs) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let (cfg, hash): (SpectrumConfig, String) = load_config(&args.config)?;
    cfg.validate()?;
    let jobs = grid(&cfg.encodings, &cfg.n_qubits, &cfg.seeds)
        .map(|(kind, n, seed)| Job {
            label: format!("{}_N{n}_seed{seed}", kind.name()),
            seed,
            item: (kind, n),
        })
        .collect();
    let outputs = run_jobs(jobs, args.jobs, |job| {
        let (kind, n) = job.item;
        let mut spec = encoding_spec(kind, n, job.seed);
        spec.delta = cfg.delta;
        spec.coupling_graph = cfg.coupling_graph;
        let h = spec.build().map_err(numerical(job.seed, &job.label))?;
        let e = hermitian_eigenvalues(&h).map_err(numerical(job.seed, &job.label))?;
        let tol = cfg.tolerance.unwrap_or_else(|| default_tolerance(&e));
        let stats = spectrum_stats(&e, tol);
        let row = vec![
            kind.name().to_string(),
            n.to_string(),
            job.seed.to_string(),
            stats.g.to_string(),
            stats.k.to_string(),
            stats.k_nonzero.to_string(),
            opt_num(stats.mean_spacing_ratio),
            stats.spacing_collisions.to_string(),
            num(tol),
        ];
        Ok((Vec::new(), vec![row]))
    })?;
    finish(
        "spectrum",
        args,
        cfg.output_dir.as_ref(),
        hash,
        ("spectrum.csv", SPECTRUM_HEADER),
        outputs,
        started,
    )
}

pub const FOURIER_HEADER: &[&str] = &[
    "encoding",
    "n_qubits",
    "seed",
    "n_samples",
    "window_x",
    "dft_peaks",
    "exact_components",
    "k_including_zero",
    "counts_agree",
];

pub fn cmd_fourier(args: &CommonArgs) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let (cfg, hash): (FourierConfig, String) = load_config(&args.config)?;
    cfg.validate()?;
    let jobs = grid(&cfg.encodings, &cfg.n_qubits, &cfg.seeds)
        .map(|(kind, n, seed)| Job {
            label: format!("{}_N{n}_seed{seed}", kind.name()),
            seed,
            item: (kind, n),
        })
        .collect();
    let outputs = run_jobs(jobs, args.jobs, |job| {
        let (kind, n) = job.item;
        let err = || numerical(job.seed, job.label.clone());
        let h = encoding_spec(kind, n, job.seed).build().map_err(err())?;
        let model = QuantumModel::new(&h, 1).map_err(err())?;
        let circuit = CircuitConfig::new(n, cfg.depth, cfg.ansatz_seed);
        let ansatz = Ansatz::new(circuit.clone()).map_err(err())?;
        let theta = AnsatzParams::random(circuit.n_params(), job.seed);
        let u = ansatz.unitary(&theta.theta).map_err(err())?;
        let dft = dft_spectrum_auto(&model, &u, cfg.max_samples).map_err(err())?;
        let exact = model.exact_fourier(&u, model.default_tol()).map_err(err())?;
        let k = frequency_set(model.energies(), model.default_tol()).k();
        let peaks = dft.peak_count(cfg.peak_threshold);
        let exact_count = exact.count_above(cfg.peak_threshold);

        let mut files = Vec::new();
        let bins: Vec<Vec<String>> = if cfg.write_bins {
            dft.bins.iter().map(|&(w, m)| vec![num(w), num(m)]).collect()
        } else {
            dft.peak_frequencies(cfg.peak_threshold)
                .into_iter()
                .zip(peak_magnitudes(&dft, cfg.peak_threshold))
                .map(|(w, m)| vec![num(w), num(m)])
                .collect()
        };
        files.push((
            format!("fourier_{}_dft.csv", job.label),
            csv_bytes(&["frequency_rad_per_unit_x", "magnitude"], &bins),
        ));
        if cfg.exact_sidecar {
            let rows: Vec<Vec<String>> = exact
                .entries
                .iter()
                .map(|&(w, c)| vec![num(w), num(c.norm()), num(c.re), num(c.im)])
                .collect();
            files.push((
                format!("fourier_{}_exact.csv", job.label),
                csv_bytes(
                    &["frequency_rad_per_unit_x", "abs_coefficient", "re_coefficient", "im_coefficient"],
                    &rows,
                ),
            ));
        }
        let row = vec![
            kind.name().to_string(),
            n.to_string(),
            job.seed.to_string(),
            dft.plan.n_samples.to_string(),
            num(dft.plan.window),
            peaks.to_string(),
            exact_count.to_string(),
            k.to_string(),
            (peaks == exact_count).to_string(),
        ];
        Ok((files, vec![row]))
    })?;
    finish(
        "fourier",
        args,
        cfg.output_dir.as_ref(),
        hash,
        ("fourier_summary.csv", FOURIER_HEADER),
        outputs,
        started,
    )
}

fn peak_magnitudes(dft: &crate::spectral::DftSpectrum, rel: f64) -> Vec<f64> {
    let peaks = dft.peak_frequencies(rel);
    dft.bins
        .iter()
        .filter(|b| peaks.contains(&b.0))
        .map(|b| b.1)
        .collect()
}

pub const TRAIN_HEADER: &[&str] = &[
    "encoding",
    "n_qubits",
    "encoding_seed",
    "seed",
    "cost_initial",
    "cost_final",
    "evaluations",
    "best_run",
];

pub fn cmd_train(args: &TrainArgs) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let (mut cfg, hash): (TrainConfig, String) = load_config(&args.common.config)?;
    if let Some(r) = args.restarts {
        cfg.restarts = r;
    }
    cfg.validate()?;
    let jobs = cfg
        .encodings
        .iter()
        .flat_map(|enc| {
            cfg.seeds.iter().map(move |&seed| Job {
                label: format!("{}_N{}_enc{}_seed{seed}", enc.kind.name(), enc.n_qubits, enc.seed),
                seed,
                item: enc.clone(),
            })
        })
        .collect();
    let outputs = run_jobs(jobs, args.common.jobs, |job| {
        let err = || numerical(job.seed, job.label.clone());
        let spec = cfg.spec(&job.item, job.seed);
        let result = train(&spec).map_err(err())?;

        let (a, b) = cfg.dataset_range;
        let step = (b - a) / (cfg.fit_points - 1) as f64;
        let xs: Vec<f64> = (0..cfg.fit_points).map(|i| a + step * i as f64).collect();
        let grid = crate::training::Dataset {
            pairs: xs.iter().map(|&x| (x, cfg.target.eval(x))).collect(),
        };
        let ctx = CostContext::from_specs(&spec.encoding, &spec.circuit, &grid).map_err(err())?;
        let preds = ctx.predictions(&result.theta_opt.theta).map_err(err())?;
        let fit: Vec<Vec<String>> = grid
            .pairs
            .iter()
            .zip(&preds)
            .map(|(&(x, y), &f)| vec![num(x), num(y), num(f)])
            .collect();
        let trace: Vec<Vec<String>> = result
            .cost_trace
            .iter()
            .enumerate()
            .map(|(i, &c)| vec![(i + 1).to_string(), num(c)])
            .collect();
        let files = vec![
            (
                format!("train_{}.json", job.label),
                serde_json::to_vec_pretty(&result).expect("result serializes"),
            ),
            (
                format!("train_{}_fit.csv", job.label),
                csv_bytes(&["x", "target", "model"], &fit),
            ),
            (
                format!("train_{}_trace.csv", job.label),
                csv_bytes(&["iteration", "best_cost_dimensionless"], &trace),
            ),
        ];
        let row = vec![
            job.item.kind.name().to_string(),
            job.item.n_qubits.to_string(),
            job.item.seed.to_string(),
            job.seed.to_string(),
            num(result.cost_initial),
            num(result.cost_final),
            result.evaluations.to_string(),
            result.best_run.to_string(),
        ];
        Ok((files, vec![row]))
    })?;
    finish(
        "train",
        &args.common,
        cfg.output_dir.as_ref(),
        hash,
        ("train_summary.csv", TRAIN_HEADER),
        outputs,
        started,
    )
}

fn eth_header(horizons: &[f64]) -> Vec<String> {
    let mut h: Vec<String> = ["encoding", "n_qubits", "seed", "resonance_count", "sigma2_analytic"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(horizons.iter().map(|p| format!("sigma2_empirical_T{p:e}_periods")));
    h.extend(
        [
            "offdiag_bound",
            "diag_ensemble",
            "degenerate",
            "microcanonical",
            "window_lo_energy_units",
            "window_hi_energy_units",
            "deviation",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

pub fn cmd_eth(args: &CommonArgs) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let (cfg, hash): (EthConfig, String) = load_config(&args.config)?;
    cfg.validate()?;
    let jobs = grid(&cfg.encodings, &cfg.n_qubits, &cfg.seeds)
        .map(|(kind, n, seed)| Job {
            label: format!("{}_N{n}_seed{seed}", kind.name()),
            seed,
            item: (kind, n),
        })
        .collect();
    let outputs = run_jobs(jobs, args.jobs, |job| {
        let (kind, n) = job.item;
        let err = || numerical(job.seed, job.label.clone());
        let h = encoding_spec(kind, n, job.seed).build().map_err(err())?;
        let a = match cfg.observable {
            ObservableSpec::Z { site } => embed_pauli(Pauli::Z, site, n).map_err(err())?,
            ObservableSpec::Hamiltonian => h.clone(),
        };
        let psi = match cfg.initial_state {
            InitialStateSpec::Zero => StateVector::zero_state(n),
            InitialStateSpec::Basis { index } => StateVector::basis(1 << n, index),
        };
        let setup = QuenchSetup::new(h, psi, a).map_err(err())?;
        let r = eth_report(&setup, &cfg.horizons, cfg.samples, cfg.window_fraction).map_err(err())?;
        let mut row = vec![
            kind.name().to_string(),
            n.to_string(),
            job.seed.to_string(),
            r.resonance_count.to_string(),
            num(r.sigma2_analytic),
        ];
        row.extend(r.sigma2_empirical.iter().map(|&(_, v)| num(v)));
        row.extend([
            num(r.offdiag_bound),
            num(r.diag_ensemble),
            r.degenerate.to_string(),
            num(r.microcanonical),
            num(r.window.lo()),
            num(r.window.energy),
            num(r.deviation),
        ]);
        Ok((Vec::new(), vec![row]))
    })?;
    let header = eth_header(&cfg.horizons);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    finish(
        "eth",
        args,
        cfg.output_dir.as_ref(),
        hash,
        ("eth_report.csv", &header),
        outputs,
        started,
    )
}

pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    let common = match &cli.command {
        Command::Spectrum(a) | Command::Fourier(a) | Command::Eth(a) => a,
        Command::Train(a) => &a.common,
    };
    if common.jobs == 0 {
        return Err(config_err("--jobs must be at least 1"));
    }
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Fourier(a) => cmd_fourier(a),
        Command::Train(a) => cmd_train(a),
        Command::Eth(a) => cmd_eth(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(manifest) => {
            log::info!("wrote {} runs", manifest.runs.len());
            EXIT_OK
        }
        Err(e) => {
            log::error!("{e}");
            eprintln!("qclspec: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        fs::write(&path, body).unwrap();
        path
    }

    fn args(config: PathBuf, out: &Path) -> CommonArgs {
        CommonArgs {
            config,
            jobs: 2,
            out: Some(out.to_path_buf()),
        }
    }

    fn column(csv_text: &str, name: &str) -> Vec<String> {
        let mut r = csv::Reader::from_reader(csv_text.as_bytes());
        let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
        r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
    }

    #[test]
    fn spectrum_counts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "s.json",
            r#"{"encodings": ["uniform", "nonintegrable"], "n_qubits": [1, 2, 3, 4], "seeds": [5]}"#,
        );
        let out = dir.path().join("out");
        let m = cmd_spectrum(&args(cfg, &out)).unwrap();
        assert_eq!(m.runs.len(), 8);
        let text = fs::read_to_string(out.join("spectrum.csv")).unwrap();
        let k = column(&text, "k_including_zero");
        assert_eq!(k, ["3", "5", "7", "9", "3", "13", "57", "241"]);
        assert_eq!(m.config_sha256.len(), 64);
        assert!(out.join("manifest.json").exists());
    }

    #[test]
    fn spectrum_exponential_two_qubits() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), "s.json", r#"{"encodings": ["exponential"], "n_qubits": [2]}"#);
        cmd_spectrum(&args(cfg, dir.path())).unwrap();
        let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
        assert_eq!(column(&text, "k_nonzero"), ["8"]);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "s.json",
            r#"{"encodings": ["uniform"], "n_qubits": [2], "colour": "blue"}"#,
        );
        let e = cmd_spectrum(&args(cfg.clone(), dir.path())).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        let code = main_with_args(["qclspec", "spectrum", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(!dir.path().join("spectrum.csv").exists());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), "s.json", r#"{"encodings": ["uniform"], "n_qubits": [0]}"#);
        assert_eq!(cmd_spectrum(&args(cfg, dir.path())).unwrap_err().exit_code(), EXIT_CONFIG);
        let cfg = write_config(
            dir.path(),
            "e.json",
            r#"{"encodings": ["uniform"], "n_qubits": [2], "observable": {"kind": "z", "site": 3}}"#,
        );
        assert_eq!(cmd_eth(&args(cfg, dir.path())).unwrap_err().exit_code(), EXIT_CONFIG);
        let missing = dir.path().join("nope.json");
        assert_eq!(cmd_spectrum(&args(missing, dir.path())).unwrap_err().exit_code(), EXIT_IO);
    }

    #[test]
    fn numerical_error_names_seed() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "f.json",
            r#"{"encodings": ["nonintegrable"], "n_qubits": [2], "seeds": [17], "max_samples": 64}"#,
        );
        let e = cmd_fourier(&args(cfg.clone(), dir.path())).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_NUMERICAL);
        assert!(e.to_string().contains("seed 17"), "{e}");
        let code = main_with_args(["qclspec", "fourier", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_NUMERICAL);
    }

    #[test]
    fn fourier_counts_agree() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "f.json",
            r#"{"encodings": ["nonintegrable"], "n_qubits": [1, 2], "seeds": [1, 2], "write_bins": false}"#,
        );
        let m = cmd_fourier(&args(cfg, dir.path())).unwrap();
        let text = fs::read_to_string(&m.summary_files[0]).unwrap();
        assert_eq!(column(&text, "dft_peaks"), ["3", "3", "13", "13"]);
        assert!(column(&text, "counts_agree").iter().all(|v| v == "true"));
        for run in &m.runs {
            assert_eq!(run.files.len(), 2);
            assert!(run.files.iter().all(|f| fs::metadata(f).unwrap().len() > 0));
        }
    }

    #[test]
    fn train_outputs_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let body = r#"{
            "encodings": [{"kind": "nonintegrable", "n_qubits": 2, "seed": 3}],
            "circuit": {"n_qubits": 2, "depth": 1, "ansatz_seed": 4},
            "target": {"kind": "gaussian"},
            "dataset_size": 12,
            "optimizer": {"max_evals": 300},
            "seeds": [1, 2],
            "fit_points": 21
        }"#;
        let cfg = write_config(dir.path(), "t.json", body);
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        let run = |out: &Path| {
            cmd_train(&TrainArgs {
                common: args(cfg.clone(), out),
                restarts: Some(1),
            })
            .unwrap()
        };
        let ma = run(&a);
        let mb = run(&b);
        assert_eq!(ma.runs.len(), 2);
        for (ra, rb) in ma.runs.iter().zip(&mb.runs) {
            for (fa, fb) in ra.files.iter().zip(&rb.files) {
                assert_eq!(fs::read(fa).unwrap(), fs::read(fb).unwrap(), "{}", fa.display());
            }
        }
        assert_eq!(
            fs::read(a.join("train_summary.csv")).unwrap(),
            fs::read(b.join("train_summary.csv")).unwrap()
        );
        let text = fs::read_to_string(a.join("train_summary.csv")).unwrap();
        assert_eq!(column(&text, "best_run").len(), 2);
        let fit = fs::read_to_string(&ma.runs[0].files[1]).unwrap();
        assert_eq!(fit.lines().count(), 22);
    }

    #[test]
    fn eth_report_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "e.json",
            r#"{"encodings": ["nonintegrable", "uniform"], "n_qubits": [3], "seeds": [2],
                "horizons": [100, 1000], "samples": 4000}"#,
        );
        let m = cmd_eth(&args(cfg, dir.path())).unwrap();
        let text = fs::read_to_string(&m.summary_files[0]).unwrap();
        let res = column(&text, "resonance_count");
        assert_eq!(res[0], "0");
        assert!(res[1].parse::<usize>().unwrap() > 0);
        let sigma: Vec<f64> = column(&text, "sigma2_analytic").iter().map(|v| v.parse().unwrap()).collect();
        let bound: Vec<f64> = column(&text, "offdiag_bound").iter().map(|v| v.parse().unwrap()).collect();
        assert!(sigma[0] <= bound[0]);
        assert!(text.lines().next().unwrap().contains("sigma2_empirical_T1e3_periods"));
    }

    #[test]
    fn eth_conserved_observable() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "e.json",
            r#"{"encodings": ["nonintegrable"], "n_qubits": [2], "seeds": [1],
                "observable": {"kind": "hamiltonian"}, "horizons": [100], "samples": 2000}"#,
        );
        let m = cmd_eth(&args(cfg, dir.path())).unwrap();
        let text = fs::read_to_string(&m.summary_files[0]).unwrap();
        let s: f64 = column(&text, "sigma2_analytic")[0].parse().unwrap();
        assert!(s < 1e-20);
        let e: f64 = column(&text, "sigma2_empirical_T1e2_periods")[0].parse().unwrap();
        assert!(e < 1e-20);
    }

    fn schema_keys(def: &str) -> Vec<String> {
        let schema: serde_json::Value =
            serde_json::from_str(include_str!("../schema/config.schema.json")).unwrap();
        let mut keys: Vec<String> = schema["$defs"][def]["properties"]
            .as_object()
            .unwrap()
            .keys()
            .cloned()
            .collect();
        keys.sort();
        keys
    }

    fn value_keys(v: serde_json::Value) -> Vec<String> {
        let mut keys: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        keys
    }

    #[test]
    fn shipped_configs_load_and_match_schema() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        let (s, _): (SpectrumConfig, _) = load_config(&dir.join("spectrum.json")).unwrap();
        s.validate().unwrap();
        assert_eq!(value_keys(serde_json::to_value(&s).unwrap()), schema_keys("spectrum"));
        let (f, _): (FourierConfig, _) = load_config(&dir.join("fourier.json")).unwrap();
        f.validate().unwrap();
        assert_eq!(value_keys(serde_json::to_value(&f).unwrap()), schema_keys("fourier"));
        let (t, _): (TrainConfig, _) = load_config(&dir.join("train.json")).unwrap();
        t.validate().unwrap();
        assert_eq!(value_keys(serde_json::to_value(&t).unwrap()), schema_keys("train"));
        assert_eq!(value_keys(serde_json::to_value(&t.optimizer).unwrap()), schema_keys("optimizer"));
        assert_eq!(value_keys(serde_json::to_value(&t.circuit).unwrap()), schema_keys("circuit"));
        assert_eq!(value_keys(serde_json::to_value(&t.encodings[0]).unwrap()), schema_keys("encoding_spec"));
        let (e, _): (EthConfig, _) = load_config(&dir.join("eth.json")).unwrap();
        e.validate().unwrap();
        assert_eq!(value_keys(serde_json::to_value(&e).unwrap()), schema_keys("eth"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn help_exits_cleanly_and_bad_flags_do_not() {
        assert_eq!(main_with_args(["qclspec", "--help"]), EXIT_OK);
        assert_eq!(main_with_args(["qclspec", "spectrum"]), EXIT_CONFIG);
    }
}
