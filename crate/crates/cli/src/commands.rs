use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use illdist::format::{load_polynomial, load_set_expecting, polynomial_to_string, polynomial_to_value, set_to_string};
use illdist::lattice_sets::{CrtMode, GeneratorSpec};
use illdist::pipeline::{iterate, IterationOutcome, PipelineConfig};
use illdist::residue::check_ill_distribution;
use illdist::sampling::{characteristic_size, select_characteristic};
use illdist::siegel::{choose_degree, measure_polynomial, solve_vanishing, SiegelInstance};
use illdist::{primes_in_window, Error, LatticePointSet};
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::FileConfig;
use crate::{emit, Command, CommonArgs, Failure, Mode, Variant, WindowArgs};

pub(crate) fn dispatch(command: &Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    let common = match command {
        Command::Gen(a) => &a.common,
        Command::Profile(a) => &a.common,
        Command::Sample(a) => &a.common,
        Command::Solve(a) => &a.common,
        Command::Pipeline(a) => &a.common,
        Command::Verify(a) => &a.common,
    };
    let file = FileConfig::load(common.config.as_deref())?;
    let threads = common.threads.map(|t| t as usize).or(file.threads);
    // stdout is buffered so the work can move onto a sized pool
    let mut buffer: Vec<u8> = Vec::new();
    let sink = &mut buffer;
    let mut body = move || match command {
        Command::Gen(a) => gen(a, &file, sink),
        Command::Profile(a) => profile(a, &file, sink),
        Command::Sample(a) => sample(a, &file, sink),
        Command::Solve(a) => solve(a, sink),
        Command::Pipeline(a) => pipeline(a, &file, sink),
        Command::Verify(a) => verify(a, sink),
    };
    let result = match threads {
        None => body(),
        Some(0) => Err(Failure::usage("USAGE", "--threads must be at least 1")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Failure::domain(Error::Internal(e.to_string())))?;
            pool.install(body)
        }
    };
    stdout
        .write_all(&buffer)
        .and_then(|()| stdout.flush())
        .map_err(|e| Failure::domain(Error::Io(e)).context("<stdout>"))?;
    result
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage("USAGE", format!("missing required flag --{flag}")))
}

fn read_set(path: &Path, dim: Option<usize>, n: Option<u64>) -> Result<LatticePointSet, Failure> {
    let ctx = path.display().to_string();
    let file = File::open(path).map_err(|e| Failure::domain(Error::Io(e)).context(&ctx))?;
    load_set_expecting(BufReader::new(file), dim, n).map_err(|e| Failure::domain(e).context(&ctx))
}

fn pretty(value: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

fn out(common: &CommonArgs, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    emit(common.output.as_deref(), bytes, stdout)
}

fn gen(a: &crate::GenArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let variant = match a.variant {
        Some(v) => v,
        None => match file.variant.as_deref() {
            Some(s) => <Variant as clap::ValueEnum>::from_str(s, true)
                .map_err(|_| Failure::usage("USAGE", format!("unknown variant `{s}` in configuration")))?,
            None => return Err(Failure::usage("USAGE", "missing required flag --variant")),
        },
    };
    let mode = match a.mode {
        Some(m) => m,
        None => match file.mode.as_deref() {
            Some(s) => <Mode as clap::ValueEnum>::from_str(s, true)
                .map_err(|_| Failure::usage("USAGE", format!("unknown mode `{s}` in configuration")))?,
            None => Mode::Small,
        },
    };
    let factor_values = |n: Option<u64>| -> Result<Vec<u64>, Failure> {
        if let Some(v) = a.values.clone().or_else(|| file.values.clone()) {
            return Ok(v);
        }
        let path = required(a.input.as_deref(), "values")?;
        let set = read_set(path, Some(1), n)?;
        Ok(set.iter().map(|p| p[0]).collect())
    };
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let set = match variant {
        Variant::Crt => {
            let n = required(a.n.or(file.n), "n")?;
            let epsilon = required(a.epsilon.or(file.epsilon), "epsilon")?;
            let mode = match mode {
                Mode::Small => CrtMode::Small,
                Mode::Full => CrtMode::Full {
                    prime_bound: a.prime_bound.or(file.prime_bound).unwrap_or(u64::MAX),
                },
            };
            GeneratorSpec::Crt { epsilon, mode, seed }.generate(n)?
        }
        Variant::Product => {
            let path = required(a.input.as_deref(), "input")?;
            let factor = read_set(path, Some(1), a.n.or(file.n))?;
            let power = required(a.d.or(file.d), "d")?;
            let n = factor.box_bound();
            GeneratorSpec::Product { factor, power }.generate(n)?
        }
        Variant::Perturbed => {
            let n = required(a.n.or(file.n), "n")?;
            let f_coeffs = required(a.coeffs.clone().or_else(|| file.coeffs.clone()), "coeffs")?;
            let factor = factor_values(Some(n))?;
            GeneratorSpec::Perturbed { f_coeffs, factor }.generate(n)?
        }
        Variant::GraphShift => {
            let n = required(a.n.or(file.n), "n")?;
            let rho = required(a.rho.or(file.rho), "rho")?;
            let degree = required(a.m.or(file.m), "m")?;
            let shifts = factor_values(Some(n))?;
            GeneratorSpec::GraphShift { rho, degree, shifts }.generate(n)?
        }
    };
    out(&a.common, set_to_string(&set).as_bytes(), stdout)
}

struct WindowChoice {
    kappa: f64,
    tau: f64,
}

fn window_choice(w: &WindowArgs, file: &FileConfig) -> Result<WindowChoice, Failure> {
    Ok(WindowChoice {
        kappa: required(w.kappa.or(file.kappa), "kappa")?,
        tau: w.tau.or(file.tau).unwrap_or(1.0),
    })
}

fn window_json(w: &illdist::PrimeWindow) -> Value {
    json!({
        "lower": w.lower,
        "upper": w.upper,
        "primes_count": w.primes.len(),
        "chebyshev_mass": w.chebyshev_mass,
        "primes": w.primes,
    })
}

fn profile(a: &crate::ProfileArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let set = read_set(&a.input, a.window.d.or(file.d), a.window.n.or(file.n))?;
    let wc = window_choice(&a.window, file)?;
    let c_bound = a.c_bound.or(file.c_bound).unwrap_or(1.0);
    let window = primes_in_window(set.box_bound(), set.dim(), wc.kappa, wc.tau)?;
    let report = check_ill_distribution(&set, &window.primes, wc.kappa, c_bound)?;
    let value = json!({
        "config": {
            "N": set.box_bound(),
            "d": set.dim(),
            "kappa": wc.kappa,
            "tau": wc.tau,
            "c_bound": c_bound,
        },
        "set_size": set.len(),
        "window": window_json(&window),
        "occupancy": report,
    });
    out(&a.common, &pretty(&value), stdout)
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

fn pipeline_config(
    set: &LatticePointSet,
    window: &WindowArgs,
    eta: Option<f64>,
    seed: Option<u64>,
    trials: Option<usize>,
    file: &FileConfig,
) -> Result<PipelineConfig, Failure> {
    let wc = window_choice(window, file)?;
    let mut c = PipelineConfig::new(set.box_bound(), set.dim(), wc.kappa);
    c.tau = wc.tau;
    c.eta = eta.or(file.eta).unwrap_or(c.eta);
    c.seed = seed.or(file.seed).unwrap_or(c.seed);
    c.trials = trials.or(file.trials).unwrap_or(c.trials);
    c.c_eta = file.c_eta.unwrap_or(c.c_eta);
    c.c_tau = file.c_tau.unwrap_or(c.c_tau);
    c.c_d = file.c_d.unwrap_or(c.c_d);
    c.c1 = file.c1.unwrap_or(c.c1);
    c.c2 = file.c2.unwrap_or(c.c2);
    c.c3 = file.c3.unwrap_or(c.c3);
    c.c4 = file.c4.unwrap_or(c.c4);
    Ok(c)
}

fn sample(a: &crate::SampleArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let set = read_set(&a.input, a.window.d.or(file.d), a.window.n.or(file.n))?;
    let config = pipeline_config(&set, &a.window, a.eta, a.seed, a.trials, file)?;
    let window = primes_in_window(config.n, config.d, config.kappa, config.tau)?;
    let r = characteristic_size(config.n, config.d, config.kappa, config.eta)?;
    let params = config.sampling_params(r);
    let s = select_characteristic(&set, &window.primes, &params, config.seed)?;
    let value = json!({
        "config": {
            "N": config.n,
            "d": config.d,
            "kappa": config.kappa,
            "tau": config.tau,
            "seed": config.seed,
            "params": params,
        },
        "set_size": set.len(),
        "window": window_json(&window),
        "sampling": {
            "r": r,
            "trials": config.trials,
            "winning_trial": s.winning_trial,
            "tuple": s.tuple,
            "good_primes": s.good_primes,
            "meets_c1": s.meets_c1,
            "s_prime_size": s.s_prime.len(),
            "meets_c3": s.meets_c3,
            "coverage_threshold": s.threshold,
            "coverage_min": s.coverage.iter().copied().reduce(f64::min),
            "coverage_median": median(&s.coverage),
            "trial_scores": s.trial_scores,
        },
    });
    out(&a.common, &pretty(&value), stdout)
}

fn solve(a: &crate::SolveArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let sigma = read_set(&a.input, None, None)?;
    let degree = match a.degree {
        Some(d) => d,
        None => choose_degree(sigma.len() as u64, sigma.dim() as u32),
    };
    let n = sigma.box_bound();
    let instance = SiegelInstance::new(sigma, degree)?;
    let poly = solve_vanishing(&instance)?;
    out(&a.common, polynomial_to_string(&poly, n).as_bytes(), stdout)
}

fn product_result(outcome: &IterationOutcome, n: u64) -> Value {
    let m = measure_polynomial(&outcome.product, n);
    json!({
        "degree": m.degree,
        "height": m.height.to_string(),
        "complexity": m.complexity,
        "set_size": outcome.set_size,
        "vanishing_count": outcome.covered_count,
        "proportion": outcome.covered_fraction,
        "forced_violations": outcome
            .rounds
            .iter()
            .map(|r| r.report.result.forced_violations)
            .sum::<usize>(),
    })
}

/// Full report: stage diagnostics of the first round, the combined result,
/// and every round with its polynomial.
pub fn pipeline_report(set: &LatticePointSet, config: &PipelineConfig, outcome: &IterationOutcome) -> Value {
    let first = &outcome.rounds[0].report;
    let iterations: Vec<Value> = outcome
        .rounds
        .iter()
        .zip(&outcome.polynomials)
        .map(|(round, poly)| {
            let mut v = serde_json::to_value(round).expect("serializable");
            v["polynomial"] = polynomial_to_value(poly, config.n);
            v
        })
        .collect();
    json!({
        "config": config,
        "set": { "N": set.box_bound(), "d": set.dim(), "size": set.len() },
        "constants": first.constants,
        "window": first.window,
        "sampling": first.sampling,
        "siegel": first.siegel,
        "result": product_result(outcome, config.n),
        "status": if outcome.complete { "complete" } else { "iteration_budget_exceeded" },
        "polynomial": polynomial_to_value(&outcome.product, config.n),
        "iterations": iterations,
    })
}

fn pipeline(a: &crate::PipelineArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let set = read_set(&a.input, a.window.d.or(file.d), a.window.n.or(file.n))?;
    let mut config = pipeline_config(&set, &a.window, a.eta, a.seed, a.trials, file)?;
    config.eps = a.eps.or(file.eps).unwrap_or(config.eps);
    config.max_iterations = a
        .max_iterations
        .or(file.max_iterations)
        .unwrap_or_else(|| illdist::pipeline::default_max_iterations(config.eps));
    let (outcome, failure) = match iterate(&set, &config) {
        Ok(o) => (o, None),
        Err(Error::IterationBudgetExceeded(o)) => {
            let f = Failure::domain(Error::IterationBudgetExceeded(o.clone()));
            (*o, Some(f))
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &a.poly {
        emit(Some(path), polynomial_to_string(&outcome.product, config.n).as_bytes(), stdout)?;
    }
    out(&a.common, &pretty(&pipeline_report(&set, &config, &outcome)), stdout)?;
    failure.map_or(Ok(()), Err)
}

fn verify(a: &crate::VerifyArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let ctx = a.poly.display().to_string();
    let file = File::open(&a.poly).map_err(|e| Failure::domain(Error::Io(e)).context(&ctx))?;
    let (poly, n) = load_polynomial(file).map_err(|e| Failure::domain(e).context(&ctx))?;
    let set = read_set(&a.input, Some(poly.dim()), Some(n))?;
    let values = set
        .points()
        .par_iter()
        .map(|x| poly.evaluate(x))
        .collect::<illdist::Result<Vec<_>>>()?;
    let vanishing = values.iter().filter(|v| v.is_zero()).count();
    let m = measure_polynomial(&poly, n);
    let value = json!({
        "set": { "N": set.box_bound(), "d": set.dim(), "size": set.len() },
        "degree": m.degree,
        "height": m.height.to_string(),
        "complexity": m.complexity,
        "vanishing_count": vanishing,
        "proportion": vanishing as f64 / set.len() as f64,
    });
    out(&a.common, &pretty(&value), stdout)
}
