//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use qclspec::circuit::{Ansatz, AnsatzParams, CircuitConfig, QuantumModel};
use qclspec::hamiltonians::{build_exponential, build_uniform, embed_pauli, EncodingKind, EncodingSpec, Pauli, Prng};
use qclspec::numkernel::{
    apply, hermitian_eigendecompose, hermitian_eigenvalues, unitary_exp, ComplexMatrix, StateVector,
};
use qclspec::spectral::{
    dft_spectrum_auto, distinct_count, frequency_set, DEFAULT_MAX_SAMPLES, DEFAULT_PEAK_THRESHOLD,
};
use qclspec::thermalization::{
    offdiagonal_bound, resonance_count, temporal_fluctuation_analytic, temporal_fluctuation_empirical, QuenchSetup,
};
use qclspec::training::{nelder_mead, train, OptimizerConfig, TargetFunction, TrainSpec};
use qclspec::Complex64;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Every ordered difference `E_a − E_b`, merged at `tol`.
fn brute_force_k(e: &[f64], tol: f64) -> usize {
    let mut d: Vec<f64> = e.iter().flat_map(|a| e.iter().map(move |b| a - b)).collect();
    d.sort_by(f64::total_cmp);
    distinct_count(&d, tol)
}

fn brute_force_resonances(e: &[f64], tol: f64) -> usize {
    let n = e.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let mut count = 0;
    for (k, &(a, b)) in pairs.iter().enumerate() {
        for &(c, d) in &pairs[k + 1..] {
            if ((e[a] - e[b]) - (e[c] - e[d])).abs() <= tol {
                count += 1;
            }
        }
    }
    count
}

fn h3(n: usize, seed: u64) -> ComplexMatrix {
    EncodingSpec::nonintegrable(n, seed).build().unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn frequency_maximum() -> Outcome {
    let expected = [3, 13, 57, 241];
    let mut detail = Vec::new();
    let mut pass = true;
    for (n, &want) in (1..=4).zip(&expected) {
        let hits = (0..10u64)
            .filter(|&s| frequency_set(&hermitian_eigenvalues(&h3(n, 100 + s)).unwrap(), 1e-9).k() == want)
            .count();
        pass &= hits >= 9;
        detail.push(format!("N={n}: {hits}/10 give K={want}"));
    }
    outcome(pass, detail.join(", "))
}

fn baseline_counts() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in 1..=4 {
        let e = hermitian_eigenvalues(&build_uniform(n).unwrap()).unwrap();
        let set = frequency_set(&e, 1e-9);
        let oracle = brute_force_k(&e, 1e-9);
        if n >= 2 {
            pass &= set.k() == 2 * n + 1 && oracle == set.k();
        }
        detail.push(format!("H1 N={n}: K={} (nonzero {})", set.k(), set.k_nonzero()));
    }
    for n in 1..=3 {
        let e = hermitian_eigenvalues(&build_exponential(n).unwrap()).unwrap();
        let set = frequency_set(&e, 1e-9);
        let oracle = brute_force_k(&e, 1e-9) - 1;
        pass &= set.k_nonzero() == 3usize.pow(n as u32) - 1 && oracle == set.k_nonzero();
        detail.push(format!("H2 N={n}: K_nonzero={}", set.k_nonzero()));
    }
    outcome(pass, detail.join(", "))
}

fn dft_agreement() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in 1..=3 {
        let agree = (0..10u64)
            .into_par_iter()
            .filter(|&s| {
                let model = QuantumModel::new(&h3(n, 200 + s), 1).unwrap();
                let cfg = CircuitConfig::new(n, 3, 300 + s);
                let u = Ansatz::new(cfg.clone())
                    .unwrap()
                    .unitary(&AnsatzParams::random(cfg.n_params(), 400 + s).theta)
                    .unwrap();
                let dft = dft_spectrum_auto(&model, &u, DEFAULT_MAX_SAMPLES).unwrap();
                let exact = model.exact_fourier(&u, model.default_tol()).unwrap();
                dft.peak_count(DEFAULT_PEAK_THRESHOLD) == exact.count_above(DEFAULT_PEAK_THRESHOLD)
            })
            .count();
        pass &= agree >= 9;
        detail.push(format!("N={n}: {agree}/10 agree"));
    }
    outcome(pass, detail.join(", "))
}

fn learning_ranking() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (target, limit) in [(TargetFunction::gaussian(), 1e-3), (TargetFunction::triangle(), 5e-3)] {
        let medians: Vec<f64> = EncodingKind::ALL
            .iter()
            .map(|&kind| {
                let costs: Vec<f64> = (1..=5u64)
                    .into_par_iter()
                    .map(|seed| {
                        let spec = TrainSpec::new(
                            EncodingSpec::new(kind, 4, 1),
                            CircuitConfig::new(4, 3, 1),
                            target.clone(),
                            seed,
                        );
                        train(&spec).unwrap().cost_final
                    })
                    .collect();
                median(costs)
            })
            .collect();
        let (uniform, exponential, nonint) = (medians[0], medians[1], medians[2]);
        let ok = nonint < uniform && nonint < exponential && nonint < limit;
        pass &= ok;
        detail.push(format!(
            "{}: median H1={uniform:.3e} H2={exponential:.3e} H3={nonint:.3e} (H3<H1 {}, H3<H2 {}, H3<{limit:e} {})",
            target.name(),
            nonint < uniform,
            nonint < exponential,
            nonint < limit
        ));
    }
    outcome(pass, detail.join("; "))
}

fn thermalization_bound() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [3, 4] {
        let results: Vec<(bool, f64)> = (0..20u64)
            .into_par_iter()
            .map(|s| {
                let z1 = embed_pauli(Pauli::Z, 1, n).unwrap();
                let setup = QuenchSetup::new(h3(n, 500 + s), StateVector::zero_state(n), z1).unwrap();
                let analytic = temporal_fluctuation_analytic(&setup);
                let bound_ok = analytic <= offdiagonal_bound(&setup);
                let horizon = 1e4 * TAU / setup.min_frequency_gap().unwrap();
                let empirical = temporal_fluctuation_empirical(&setup, horizon, 20_000).unwrap();
                (bound_ok, (empirical - analytic).abs() / analytic)
            })
            .collect();
        let bound_all = results.iter().all(|r| r.0);
        let close = results.iter().filter(|r| r.1 < 0.1).count();
        let worst = median(results.iter().map(|r| r.1).collect());
        pass &= bound_all && close >= 18;
        detail.push(format!(
            "N={n}: bound holds {}, {close}/20 within 10% (median rel err {worst:.2e})",
            bound_all
        ));
    }
    outcome(pass, detail.join(", "))
}

fn non_resonance() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [2, 3] {
        let clean = (0..20u64)
            .filter(|&s| {
                let e = hermitian_eigenvalues(&h3(n, 600 + s)).unwrap();
                resonance_count(&e, 1e-9) == 0 && brute_force_resonances(&e, 1e-9) == 0
            })
            .count();
        pass &= clean == 20;
        detail.push(format!("H3 N={n}: {clean}/20 non-resonant"));
    }
    let e1 = hermitian_eigenvalues(&build_uniform(2).unwrap()).unwrap();
    let r1 = resonance_count(&e1, 1e-9);
    pass &= r1 > 0 && r1 == brute_force_resonances(&e1, 1e-9);
    detail.push(format!("H1 N=2: {r1} resonances"));
    outcome(pass, detail.join(", "))
}

fn random_hermitian(dim: usize, rng: &mut Prng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(rng.uniform(-1.0, 1.0), 0.0);
        for j in i + 1..dim {
            let z = Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

fn random_state(dim: usize, rng: &mut Prng) -> StateVector {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    StateVector::new(v.into_iter().map(|z| z / norm).collect()).unwrap()
}

fn kernel_properties() -> Outcome {
    let mut failures = Vec::new();
    for case in 0..50u64 {
        let mut rng = Prng::new(7000 + case);
        let dim = 2 + (rng.next_u64() % 15) as usize;
        let h = random_hermitian(dim, &mut rng);
        let eig = hermitian_eigendecompose(&h).unwrap();
        let s = rng.uniform(-3.0, 3.0);
        let prod = unitary_exp(&eig, s).matmul(&unitary_exp(&eig, -s)).unwrap();
        if prod.max_abs_diff(&ComplexMatrix::identity(dim)) > 1e-10 {
            failures.push(format!("case {case}: exp inverse"));
        }
        if eig.reconstruct().max_abs_diff(&h) > 1e-9 {
            failures.push(format!("case {case}: reconstruction"));
        }
        let psi = random_state(dim, &mut rng);
        let moved = apply(&unitary_exp(&eig, s), &psi).unwrap();
        if (moved.norm() - 1.0).abs() > 1e-12 {
            failures.push(format!("case {case}: norm"));
        }

        let n = 1 + (case % 3) as usize;
        let kind = EncodingKind::ALL[(case / 3 % 3) as usize];
        let model = QuantumModel::new(&EncodingSpec::new(kind, n, case).build().unwrap(), 1).unwrap();
        let cfg = CircuitConfig::new(n, 1 + (case % 3) as usize, case);
        let u = Ansatz::new(cfg.clone())
            .unwrap()
            .unitary(&AnsatzParams::random(cfg.n_params(), case).theta)
            .unwrap();
        let series = model.exact_fourier(&u, model.default_tol()).unwrap();
        let worst = (0..200)
            .map(|k| {
                let x = -PI + TAU * k as f64 / 199.0;
                let f = model.eval(&u, x).unwrap();
                let r = series.evaluate(x);
                (r.re - f).abs().max(r.im.abs())
            })
            .fold(0.0, f64::max);
        if worst > 1e-8 {
            failures.push(format!("case {case}: fourier {worst:e}"));
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        "50/50 cases pass all four properties".to_string()
    } else {
        failures.join(", ")
    };
    outcome(pass, detail)
}

fn nelder_mead_oracle() -> Outcome {
    let q = nelder_mead(|v| (v[0] - 1.0).powi(2), &[0.0], &OptimizerConfig::default()).unwrap();
    let q_ok = (q.x[0] - 1.0).abs() < 1e-6 && q.evaluations < 200;
    let cfg = OptimizerConfig {
        max_evals: 5000,
        ..OptimizerConfig::default()
    };
    let r = nelder_mead(
        |v| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2),
        &[-1.2, 1.0],
        &cfg,
    )
    .unwrap();
    let r_ok = r.f_final < 1e-6 && r.evaluations <= 5000;
    outcome(
        q_ok && r_ok,
        format!(
            "quadratic x={:.8} in {} evals; Rosenbrock f={:.2e} in {} evals",
            q.x[0], q.evaluations, r.f_final, r.evaluations
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 frequency maximum", Duration::from_secs(30), frequency_maximum),
        ("2 baseline counts", Duration::from_secs(10), baseline_counts),
        ("3 DFT/exact agreement", Duration::from_secs(120), dft_agreement),
        ("4 learning ranking", Duration::from_secs(3600), learning_ranking),
        ("5 thermalization bound", Duration::from_secs(300), thermalization_bound),
        ("6 non-resonance", Duration::from_secs(60), non_resonance),
        ("7 kernel properties", Duration::from_secs(30), kernel_properties),
        ("8 Nelder-Mead oracle", Duration::from_secs(5), nelder_mead_oracle),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, budget, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} [{:.1?} of {:?}] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed,
            budget,
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
