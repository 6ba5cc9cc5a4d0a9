//! Supervised regression of the quantum model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Ansatz, AnsatzParams, CircuitConfig, QuantumModel};
use crate::hamiltonians::{EncodingSpec, Prng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetFunction {
    /// `e^{-exponent·x²}`.
    Gaussian {
        #[serde(default = "default_exponent")]
        exponent: f64,
    },
    /// Triangle wave peaking at `x = 0` with value `amplitude`.
    Triangle {
        #[serde(default = "default_period")]
        period: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Piecewise-linear interpolation through `(x, y)` points, clamped at the ends.
    Tabulated { points: Vec<(f64, f64)> },
}

fn default_exponent() -> f64 {
    10.0
}
fn default_period() -> f64 {
    2.0
}
fn default_amplitude() -> f64 {
    1.0
}

impl TargetFunction {
    pub fn gaussian() -> Self {
        Self::Gaussian { exponent: 10.0 }
    }

    pub fn triangle() -> Self {
        Self::Triangle {
            period: 2.0,
            amplitude: 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Triangle { .. } => "triangle",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { exponent } if !exponent.is_finite() => {
                Err(Error::InvalidConfig("gaussian exponent must be finite".into()))
            }
            Self::Triangle { period, amplitude } if !(*period > 0.0 && period.is_finite() && amplitude.is_finite()) => {
                Err(Error::InvalidConfig("triangle period must be positive".into()))
            }
            Self::Tabulated { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidConfig("tabulated target needs at least one point".into()));
                }
                if points.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::InvalidConfig("tabulated x values must be strictly increasing".into()));
                }
                if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                    return Err(Error::InvalidConfig("tabulated points must be finite".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { exponent } => (-exponent * x * x).exp(),
            Self::Triangle { period, amplitude } => {
                let phase = (x + period / 2.0).rem_euclid(*period) / period;
                amplitude * (1.0 - 4.0 * (phase - 0.5).abs())
            }
            Self::Tabulated { points } => {
                let idx = points.partition_point(|p| p.0 <= x);
                if idx == 0 {
                    points[0].1
                } else if idx == points.len() {
                    points[points.len() - 1].1
                } else {
                    let (x0, y0) = points[idx - 1];
                    let (x1, y1) = points[idx];
                    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
                }
            }
        }
    }
}

/// Target evaluation as a free function.
pub fn target_eval(target: &TargetFunction, x: f64) -> f64 {
    target.eval(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub pairs: Vec<(f64, f64)>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }
}

/// `len` equally spaced inputs over `[a, b]` inclusive, labelled by `target`.
pub fn gen_dataset(target: &TargetFunction, len: usize, (a, b): (f64, f64)) -> Result<Dataset> {
    if len < 2 {
        return Err(Error::InvalidConfig(format!("dataset needs at least 2 points, got {len}")));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidConfig(format!("dataset range [{a}, {b}] is not a proper interval")));
    }
    target.validate()?;
    let step = (b - a) / (len - 1) as f64;
    let pairs = (0..len)
        .map(|i| {
            let x = if i == len - 1 { b } else { a + step * i as f64 };
            (x, target.eval(x))
        })
        .collect();
    Ok(Dataset { pairs })
}

/// Everything needed to evaluate `L_c(θ) = ½ Σ (f_θ(x_i) − y_i)²` repeatedly.
#[derive(Debug, Clone)]
pub struct CostContext {
    pub model: QuantumModel,
    pub ansatz: Ansatz,
    encoded: Vec<Vec<Complex64>>,
    targets: Vec<f64>,
}

impl CostContext {
    pub fn new(model: QuantumModel, ansatz: Ansatz, dataset: &Dataset) -> Result<Self> {
        if model.n_qubits() != ansatz.config.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: model.n_qubits(),
                found: ansatz.config.n_qubits,
            });
        }
        let encoded = dataset.pairs.iter().map(|&(x, _)| model.encoded_state(x)).collect();
        let targets = dataset.pairs.iter().map(|p| p.1).collect();
        Ok(Self {
            model,
            ansatz,
            encoded,
            targets,
        })
    }

    /// Builds model and ansatz from their specs.
    pub fn from_specs(encoding: &EncodingSpec, circuit: &CircuitConfig, dataset: &Dataset) -> Result<Self> {
        if encoding.n_qubits != circuit.n_qubits {
            return Err(Error::InvalidConfig(format!(
                "encoding has {} qubits but the circuit has {}",
                encoding.n_qubits, circuit.n_qubits
            )));
        }
        let model = QuantumModel::new(&encoding.build()?, circuit.observable_site)?;
        let ansatz = Ansatz::new(circuit.clone())?;
        Self::new(model, ansatz, dataset)
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.config.n_params()
    }

    pub fn predictions(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let u = self.ansatz.unitary(theta)?;
        Ok(self.encoded.iter().map(|phi| self.model.measure(&u, phi)).collect())
    }

    pub fn cost(&self, theta: &[f64]) -> Result<f64> {
        let preds = self.predictions(theta)?;
        Ok(0.5 * preds.iter().zip(&self.targets).map(|(f, y)| (f - y).powi(2)).sum::<f64>())
    }
}

/// `½ Σ_i (f_θ(x_i) − y_i)²`.
pub fn cost(theta: &AnsatzParams, ctx: &CostContext) -> Result<f64> {
    ctx.cost(&theta.theta)
}

fn default_max_iters() -> usize {
    20_000
}
fn default_max_evals() -> usize {
    20_000
}
fn default_tol() -> f64 {
    1e-8
}
fn default_alpha() -> f64 {
    1.0
}
fn default_gamma() -> f64 {
    2.0
}
fn default_half() -> f64 {
    0.5
}
fn default_step() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Checked once per iteration, so a run may overshoot by up to `n + 1` evaluations.
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
    #[serde(default = "default_tol")]
    pub f_tol: f64,
    #[serde(default = "default_tol")]
    pub x_tol: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_half")]
    pub rho: f64,
    #[serde(default = "default_half")]
    pub sigma: f64,
    /// Initial simplex offset along each axis, as a fraction of `max(1, |θ_i|)`.
    #[serde(default = "default_step")]
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: default_max_iters(),
            max_evals: default_max_evals(),
            f_tol: default_tol(),
            x_tol: default_tol(),
            alpha: 1.0,
            gamma: 2.0,
            rho: 0.5,
            sigma: 0.5,
            initial_step: default_step(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha > 0.0
            && self.gamma > 1.0
            && self.rho > 0.0
            && self.rho < 1.0
            && self.sigma > 0.0
            && self.sigma < 1.0
            && self.initial_step > 0.0
            && self.f_tol >= 0.0
            && self.x_tol >= 0.0;
        if !ok {
            return Err(Error::InvalidConfig(
                "optimizer coefficients must satisfy alpha > 0, gamma > 1, 0 < rho, sigma < 1, initial_step > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub x: Vec<f64>,
    pub f_initial: f64,
    pub f_final: f64,
    /// Best value after each iteration.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::ObjectiveNonFinite {
                evaluation: self.evaluations,
            });
        }
        Ok(v)
    }
}

/// Derivative-free minimisation with reflection, expansion, outside/inside
/// contraction and shrink steps.
///
/// Stops when the simplex values agree within `f_tol` and every vertex lies
/// within `x_tol` (max-norm) of the best one, when all values are exactly
/// equal, or when an iteration or evaluation budget runs out.
pub fn nelder_mead<F>(objective: F, theta0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    if theta0.is_empty() {
        return Err(Error::InvalidConfig("cannot optimise over zero parameters".into()));
    }
    let n = theta0.len();
    let mut obj = Counted { f: objective, evaluations: 0 };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f_initial = obj.call(theta0)?;
    simplex.push((theta0.to_vec(), f_initial));
    for i in 0..n {
        let mut x = theta0.to_vec();
        x[i] += cfg.initial_step * theta0[i].abs().max(1.0);
        let fx = obj.call(&x)?;
        simplex.push((x, fx));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect() };

    loop {
        // Stable sort keeps earlier vertices ahead on ties.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let spread = simplex.iter().map(|v| (v.1 - best).abs()).fold(0.0, f64::max);
        let displacement = simplex[1..]
            .iter()
            .flat_map(|v| v.0.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread == 0.0 || (spread <= cfg.f_tol && displacement <= cfg.x_tol) {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iters || obj.evaluations >= cfg.max_evals {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(&v.0) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].1;
        let second_worst = simplex[n - 1].1;

        let xr = point(&centroid, &simplex[n].0, -cfg.alpha);
        let fr = obj.call(&xr)?;
        if fr < best {
            let xe = point(&centroid, &simplex[n].0, -cfg.alpha * cfg.gamma);
            let fe = obj.call(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second_worst {
            simplex[n] = (xr, fr);
        } else {
            let mut shrink = true;
            if fr < worst {
                let xc = point(&centroid, &simplex[n].0, -cfg.alpha * cfg.rho);
                let fc = obj.call(&xc)?;
                if fc <= fr {
                    simplex[n] = (xc, fc);
                    shrink = false;
                }
            } else {
                let xcc = point(&centroid, &simplex[n].0, cfg.rho);
                let fcc = obj.call(&xcc)?;
                if fcc < worst {
                    simplex[n] = (xcc, fcc);
                    shrink = false;
                }
            }
            if shrink {
                let x0 = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x = point(&x0, &v.0, cfg.sigma);
                    let fx = obj.call(&x)?;
                    *v = (x, fx);
                }
            }
        }
        let current = simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        trace.push(current);
    }

    let (x, f_final) = simplex.swap_remove(0);
    Ok(OptimizeResult {
        x,
        f_initial,
        f_final,
        trace,
        evaluations: obj.evaluations,
        iterations,
        converged,
    })
}

fn default_dataset_size() -> usize {
    100
}
fn default_dataset_range() -> (f64, f64) {
    (-1.0, 1.0)
}

/// A complete, reproducible training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    pub encoding: EncodingSpec,
    pub circuit: CircuitConfig,
    pub target: TargetFunction,
    #[serde(default = "default_dataset_size")]
    pub dataset_size: usize,
    #[serde(default = "default_dataset_range")]
    pub dataset_range: (f64, f64),
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Seed of the `U[0, 2π)` draws for the starting angles.
    #[serde(default)]
    pub init_seed: u64,
    /// Extra runs from fresh starting angles; the best run is kept.
    #[serde(default)]
    pub restarts: usize,
}

impl TrainSpec {
    pub fn new(encoding: EncodingSpec, circuit: CircuitConfig, target: TargetFunction, init_seed: u64) -> Self {
        Self {
            encoding,
            circuit,
            target,
            dataset_size: default_dataset_size(),
            dataset_range: default_dataset_range(),
            optimizer: OptimizerConfig::default(),
            init_seed,
            restarts: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.encoding.validate()?;
        self.circuit.validate()?;
        self.target.validate()?;
        self.optimizer.validate()?;
        if self.encoding.n_qubits != self.circuit.n_qubits {
            return Err(Error::InvalidConfig(format!(
                "encoding has {} qubits but the circuit has {}",
                self.encoding.n_qubits, self.circuit.n_qubits
            )));
        }
        Ok(())
    }

    pub fn dataset(&self) -> Result<Dataset> {
        gen_dataset(&self.target, self.dataset_size, self.dataset_range)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub theta_init: AnsatzParams,
    pub theta_opt: AnsatzParams,
    pub cost_initial: f64,
    pub cost_final: f64,
    /// Best cost after each accepted iteration, across all restarts.
    pub cost_trace: Vec<f64>,
    pub evaluations: usize,
    /// Index of the run (0 = first start) that produced `theta_opt`.
    pub best_run: usize,
}

/// Trains the model described by `spec` and keeps the best run.
pub fn train(spec: &TrainSpec) -> Result<TrainResult> {
    spec.validate()?;
    let dataset = spec.dataset()?;
    let ctx = CostContext::from_specs(&spec.encoding, &spec.circuit, &dataset)?;
    train_with_context(&ctx, spec)
}

/// Same as [`train`] with a prebuilt cost context.
pub fn train_with_context(ctx: &CostContext, spec: &TrainSpec) -> Result<TrainResult> {
    let n_params = ctx.n_params();
    let mut rng = Prng::new(spec.init_seed);
    let mut best: Option<(OptimizeResult, AnsatzParams, usize)> = None;
    let mut first_start: Option<(AnsatzParams, f64)> = None;
    let mut trace: Vec<f64> = Vec::new();
    let mut evaluations = 0;

    for run in 0..=spec.restarts {
        let theta0: Vec<f64> = (0..n_params).map(|_| rng.uniform(0.0, std::f64::consts::TAU)).collect();
        let mut failure = None;
        let result = nelder_mead(
            |theta| match ctx.cost(theta) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            &theta0,
            &spec.optimizer,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let result = result?;
        evaluations += result.evaluations;
        let best_so_far = trace.last().copied().unwrap_or(f64::INFINITY);
        trace.extend(result.trace.iter().map(|&c| c.min(best_so_far)));
        if first_start.is_none() {
            first_start = Some((AnsatzParams::new(theta0.clone()), result.f_initial));
        }
        let better = best.as_ref().is_none_or(|(b, _, _)| result.f_final < b.f_final);
        if better {
            best = Some((result, AnsatzParams::new(theta0), run));
        }
    }

    let (result, _, best_run) = best.expect("at least one run");
    let (theta_init, cost_initial) = first_start.expect("at least one run");
    Ok(TrainResult {
        theta_init,
        theta_opt: AnsatzParams::new(result.x),
        cost_initial,
        cost_final: result.f_final,
        cost_trace: trace,
        evaluations,
        best_run,
    })
}
