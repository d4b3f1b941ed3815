//! End-to-end extraction: prime window, characteristic tuple, vanishing
//! polynomial, exact verification, and iteration over the uncovered residue.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::ln_biguint;
use crate::error::{invalid, Error, Result};
use crate::lattice_sets::{LatticePointSet, Point};
use crate::residue::{chebyshev_mass, check_kappa, primes_in_window};
use crate::sampling::{characteristic_size, select_characteristic, SamplingParams};
use crate::siegel::{choose_degree, measure_polynomial, solve_vanishing, IntegerPolynomial, SiegelInstance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    #[serde(rename = "N")]
    pub n: u64,
    pub d: usize,
    pub kappa: f64,
    pub eta: f64,
    pub tau: f64,
    pub eps: f64,
    pub seed: u64,
    pub trials: usize,
    /// `C1` in `eta >= C1 tau^kappa`.
    #[serde(rename = "C1")]
    pub c_eta: f64,
    /// `C2` in `tau >= C2 eta^(1/d)`.
    #[serde(rename = "C2")]
    pub c_tau: f64,
    /// `c_d` in the value bound `|P(x)| <= N^(c_d r^(1/d))`; reporting only.
    pub c_d: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub max_iterations: usize,
}

impl PipelineConfig {
    pub fn new(n: u64, d: usize, kappa: f64) -> Self {
        let eps = 0.1;
        PipelineConfig {
            n,
            d,
            kappa,
            eta: 1.0,
            tau: 1.0,
            eps,
            seed: 0,
            trials: 64,
            c_eta: 1.0,
            c_tau: 1.0,
            c_d: 1.0,
            c1: 0.1,
            c2: 0.1,
            c3: 0.1,
            c4: 0.25,
            max_iterations: default_max_iterations(eps),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(invalid(format!("N must be at least 3, got {}", self.n)));
        }
        check_kappa(self.d, self.kappa)?;
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        for (name, v) in [
            ("eta", self.eta),
            ("tau", self.tau),
            ("C1", self.c_eta),
            ("C2", self.c_tau),
            ("c_d", self.c_d),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be at least 1"));
        }
        self.sampling_params(1).validate()
    }

    pub fn sampling_params(&self, r: usize) -> SamplingParams {
        SamplingParams {
            eta: self.eta,
            r,
            trials: self.trials,
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
            c4: self.c4,
        }
    }
}

/// `4 ceil(1 / eps)`.
pub fn default_max_iterations(eps: f64) -> usize {
    4 * (1.0 / eps).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsCheck {
    /// `eta >= C1 tau^kappa`
    pub eta_condition: bool,
    /// `tau >= C2 eta^(1/d)`
    pub tau_condition: bool,
    pub holds: bool,
    /// `(C1 C2^kappa)^(d / (d - kappa))`
    pub min_eta: f64,
    pub explanation: String,
}

pub fn constants_check(config: &PipelineConfig) -> Result<ConstantsCheck> {
    check_kappa(config.d, config.kappa)?;
    for (name, v) in [("eta", config.eta), ("tau", config.tau), ("C1", config.c_eta), ("C2", config.c_tau)] {
        if v.is_nan() || v <= 0.0 {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let d = config.d as f64;
    let eta_rhs = config.c_eta * config.tau.powf(config.kappa);
    let tau_rhs = config.c_tau * config.eta.powf(1.0 / d);
    let eta_condition = config.eta >= eta_rhs;
    let tau_condition = config.tau >= tau_rhs;
    let min_eta = (config.c_eta * config.c_tau.powf(config.kappa)).powf(d / (d - config.kappa));
    let explanation = format!(
        "eta = {} {} C1 tau^kappa = {eta_rhs}; tau = {} {} C2 eta^(1/d) = {tau_rhs}; \
         both are satisfiable with tau = C2 eta^(1/d) once eta >= {min_eta}",
        config.eta,
        if eta_condition { ">=" } else { "<" },
        config.tau,
        if tau_condition { ">=" } else { "<" },
    );
    Ok(ConstantsCheck {
        eta_condition,
        tau_condition,
        holds: eta_condition && tau_condition,
        min_eta,
        explanation,
    })
}

/// Sum of `ln p` over the window primes dividing `value`; every prime divides
/// zero, so a zero value returns the full Chebyshev mass.
pub fn divisor_weight_of_value(value: &BigInt, primes: &[u64]) -> f64 {
    if value.is_zero() {
        return chebyshev_mass(primes);
    }
    primes
        .iter()
        .filter(|&&p| (value % BigInt::from(p)).is_zero())
        .map(|&p| (p as f64).ln())
        .sum()
}

pub fn divisor_weight(poly: &IntegerPolynomial, x: &[u64], primes: &[u64]) -> Result<f64> {
    Ok(divisor_weight_of_value(&poly.evaluate(x)?, primes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSummary {
    pub lower: f64,
    pub upper: f64,
    pub primes_count: usize,
    pub chebyshev_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingSummary {
    pub r: usize,
    pub trials: usize,
    pub winning_trial: Option<usize>,
    pub good_primes: Vec<u64>,
    pub meets_c1: bool,
    pub s_prime_size: usize,
    pub meets_c3: bool,
    pub coverage_threshold: f64,
    pub coverage_min: Option<f64>,
    pub coverage_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiegelSummary {
    #[serde(rename = "D")]
    pub degree_cap: u32,
    #[serde(rename = "R")]
    pub monomials: u64,
    pub sigma_size: usize,
    pub log_height_bound: f64,
    pub height: String,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultSummary {
    pub degree: u32,
    pub height: String,
    pub complexity: f64,
    pub set_size: usize,
    pub vanishing_count: usize,
    pub proportion: f64,
    /// Points of `S'` whose window divisor weight exceeds `ln(H R N^deg)`.
    pub forced_count: usize,
    /// Forced points with a nonzero value; arithmetically impossible.
    pub forced_violations: usize,
    pub tuple_vanishes: bool,
    /// `ln(H R N^deg)`, the explicit bound on `ln |P(x)|` over the box.
    pub log_value_bound: f64,
    /// `c_d r^(1/d) ln N`, the same bound in its asymptotic form.
    pub asymptotic_log_value_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundReport {
    pub window: WindowSummary,
    pub sampling: SamplingSummary,
    pub siegel: SiegelSummary,
    pub result: ResultSummary,
    pub constants: ConstantsCheck,
}

fn check_set_against(set: &LatticePointSet, config: &PipelineConfig) -> Result<()> {
    if set.dim() != config.d {
        return Err(Error::DimensionMismatch {
            expected: config.d,
            found: set.dim(),
        });
    }
    if set.box_bound() != config.n {
        return Err(invalid(format!(
            "point set declares N={}, configuration has N={}",
            set.box_bound(),
            config.n
        )));
    }
    Ok(())
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

/// One pass: window, tuple, degree, polynomial, verification.
pub fn run_once(set: &LatticePointSet, config: &PipelineConfig) -> Result<(IntegerPolynomial, RoundReport)> {
    config.validate()?;
    check_set_against(set, config)?;
    let constants = constants_check(config)?;

    let window = primes_in_window(config.n, config.d, config.kappa, config.tau)?;
    if window.primes.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let r = characteristic_size(config.n, config.d, config.kappa, config.eta)?;
    let sample = select_characteristic(set, &window.primes, &config.sampling_params(r), config.seed)?;

    let degree_cap = choose_degree(r as u64, config.d as u32);
    let sigma = LatticePointSet::new(config.d, config.n, sample.tuple.clone())?;
    let instance = SiegelInstance::new(sigma, degree_cap)?;
    let poly = solve_vanishing(&instance)?;
    let measure = measure_polynomial(&poly, config.n);

    let values: Vec<BigInt> = set
        .points()
        .par_iter()
        .map(|x| poly.evaluate(x))
        .collect::<Result<_>>()?;
    let vanishing_count = values.iter().filter(|v| v.is_zero()).count();
    let tuple_vanishes = sample
        .tuple
        .iter()
        .all(|c| poly.evaluate(c).map(|v| v.is_zero()).unwrap_or(false));

    let log_value_bound = ln_biguint(&measure.height)
        + (instance.monomials() as f64).ln()
        + measure.degree as f64 * (config.n as f64).ln();
    let mut forced_count = 0;
    let mut forced_violations = 0;
    for x in &sample.s_prime {
        let idx = set
            .points()
            .binary_search(x)
            .map_err(|_| Error::Internal("S' point missing from S".into()))?;
        let weight = divisor_weight_of_value(&values[idx], &window.primes);
        if weight > log_value_bound {
            forced_count += 1;
            if !values[idx].is_zero() {
                forced_violations += 1;
            }
        }
    }

    let report = RoundReport {
        window: WindowSummary {
            lower: window.lower,
            upper: window.upper,
            primes_count: window.primes.len(),
            chebyshev_mass: window.chebyshev_mass,
        },
        sampling: SamplingSummary {
            r,
            trials: config.trials,
            winning_trial: sample.winning_trial,
            good_primes: sample.good_primes.clone(),
            meets_c1: sample.meets_c1,
            s_prime_size: sample.s_prime.len(),
            meets_c3: sample.meets_c3,
            coverage_threshold: sample.threshold,
            coverage_min: sample.coverage.iter().copied().reduce(f64::min),
            coverage_median: median(&sample.coverage),
        },
        siegel: SiegelSummary {
            degree_cap,
            monomials: instance.monomials(),
            sigma_size: instance.sigma.len(),
            log_height_bound: instance.log_height_bound(),
            height: measure.height.to_string(),
            within_bound: instance.bound.admits(&measure.height),
        },
        result: ResultSummary {
            degree: measure.degree,
            height: measure.height.to_string(),
            complexity: measure.complexity,
            set_size: set.len(),
            vanishing_count,
            proportion: vanishing_count as f64 / set.len() as f64,
            forced_count,
            forced_violations,
            tuple_vanishes,
            log_value_bound,
            asymptotic_log_value_bound: config.c_d
                * (r as f64).powf(1.0 / config.d as f64)
                * (config.n as f64).ln(),
        },
        constants,
    };
    Ok((poly, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRound {
    pub round: usize,
    pub seed: u64,
    pub residual_size: usize,
    pub newly_covered: usize,
    pub covered_after: usize,
    pub covered_fraction: f64,
    pub report: RoundReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    pub polynomials: Vec<IntegerPolynomial>,
    pub product: IntegerPolynomial,
    pub rounds: Vec<IterationRound>,
    pub set_size: usize,
    pub covered_count: usize,
    pub covered_fraction: f64,
    /// Target `(1 - eps)` reached.
    pub complete: bool,
}

/// Seed used for round `round` (zero-based).
pub fn round_seed(seed: u64, round: usize) -> u64 {
    seed.wrapping_add((round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Repeats [`run_once`] on the points where every earlier polynomial is
/// nonzero until at least `(1 - eps) |S|` points are covered.
///
/// Exhausting `max_iterations` first yields `IterationBudgetExceeded`
/// carrying the partial outcome.
pub fn iterate(set: &LatticePointSet, config: &PipelineConfig) -> Result<IterationOutcome> {
    config.validate()?;
    check_set_against(set, config)?;
    let total = set.len();
    let target = (1.0 - config.eps) * total as f64;
    let mut covered = vec![false; total];
    let mut covered_count = 0usize;
    let mut polynomials: Vec<IntegerPolynomial> = Vec::new();
    let mut rounds = Vec::new();

    while (covered_count as f64) < target && rounds.len() < config.max_iterations {
        let round = rounds.len();
        let residual = set.filter({
            let mut i = 0;
            let covered = &covered;
            move |_| {
                let keep = !covered[i];
                i += 1;
                keep
            }
        })?;
        let seed = round_seed(config.seed, round);
        let round_config = PipelineConfig {
            seed,
            ..config.clone()
        };
        let (poly, report) = run_once(&residual, &round_config)?;
        let zero_flags: Vec<bool> = set
            .points()
            .par_iter()
            .enumerate()
            .map(|(i, x)| Ok(!covered[i] && poly.evaluate(x)?.is_zero()))
            .collect::<Result<_>>()?;
        let newly_covered = zero_flags.iter().filter(|&&z| z).count();
        for (c, z) in covered.iter_mut().zip(zero_flags) {
            *c |= z;
        }
        covered_count += newly_covered;
        polynomials.push(poly);
        rounds.push(IterationRound {
            round,
            seed,
            residual_size: residual.len(),
            newly_covered,
            covered_after: covered_count,
            covered_fraction: covered_count as f64 / total as f64,
            report,
        });
    }

    let mut product = polynomials[0].clone();
    for p in &polynomials[1..] {
        product = product.mul(p)?;
    }
    let product_zeros: Vec<bool> = set
        .points()
        .par_iter()
        .map(|x| Ok(product.evaluate(x)?.is_zero()))
        .collect::<Result<_>>()?;
    if product_zeros != covered {
        return Err(Error::Internal(
            "zero set of the product differs from the union of the rounds' zero sets".into(),
        ));
    }

    let outcome = IterationOutcome {
        complete: covered_count as f64 >= target,
        polynomials,
        product,
        rounds,
        set_size: total,
        covered_count,
        covered_fraction: covered_count as f64 / total as f64,
    };
    if outcome.complete {
        Ok(outcome)
    } else {
        Err(Error::IterationBudgetExceeded(Box::new(outcome)))
    }
}

/// Degree, height and complexity of the combined product.
pub fn product_summary(outcome: &IterationOutcome, box_bound: u64) -> (u32, String, f64) {
    let m = measure_polynomial(&outcome.product, box_bound);
    (m.degree, m.height.to_string(), m.complexity)
}

/// Upper estimate `sum ln H(P_i) + sum ln(terms of partial products)` for the
/// log-height of the product.
pub fn product_log_height_estimate(polynomials: &[IntegerPolynomial]) -> f64 {
    let mut total: f64 = polynomials.iter().map(|p| ln_biguint(&p.height())).sum();
    let mut partial: Option<IntegerPolynomial> = None;
    for p in polynomials {
        partial = Some(match partial {
            None => p.clone(),
            Some(acc) => {
                total += (acc.term_count().min(p.term_count()) as f64).ln();
                acc.mul(p).expect("same dimension")
            }
        });
    }
    total
}

/// Points of the set where `poly` vanishes, by exact evaluation.
pub fn vanishing_points(poly: &IntegerPolynomial, set: &LatticePointSet) -> Result<Vec<Point>> {
    set.points()
        .par_iter()
        .filter_map(|x| match poly.evaluate(x) {
            Ok(v) if v.is_zero() => Some(Ok(x.clone())),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
        .collect()
}

/// `ln |value|` for nonzero integers; used by the divisibility sanity checks.
pub fn ln_abs_value(value: &BigInt) -> Option<f64> {
    if value.is_zero() {
        None
    } else {
        Some(value.magnitude().to_f64().map_or_else(|| ln_biguint(value.magnitude()), f64::ln))
    }
}
