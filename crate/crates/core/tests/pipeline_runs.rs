use illdist::pipeline::{divisor_weight_of_value, iterate, run_once, PipelineConfig};
use illdist::primes::primes_up_to;
use illdist::siegel::choose_degree;
use illdist::{make_set, Error, LatticePointSet, Point};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

fn diagonal(n: u64) -> LatticePointSet {
    make_set(2, n, (1..=n).map(|i| vec![i, i]).collect()).unwrap()
}

fn two_diagonals(n: u64) -> LatticePointSet {
    let pts: Vec<Point> = (1..=n).flat_map(|i| [vec![i, i], vec![i, n + 1 - i]]).collect();
    make_set(2, n, pts).unwrap()
}

#[test]
fn diagonal_is_covered_for_every_seed() {
    for seed in 0..3 {
        let config = PipelineConfig {
            seed,
            ..PipelineConfig::new(200, 2, 1.0)
        };
        let (poly, report) = run_once(&diagonal(200), &config).unwrap();
        let r = report.sampling.r as u64;
        assert_eq!(report.result.proportion, 1.0, "seed {seed}");
        assert!(poly.degree() <= choose_degree(r, 2));
        assert_eq!(report.result.forced_violations, 0);
        assert!(report.result.tuple_vanishes);
    }
}

#[test]
fn union_of_diagonals_is_covered_within_two_rounds() {
    for seed in 0..3 {
        let config = PipelineConfig {
            seed,
            ..PipelineConfig::new(100, 2, 1.0)
        };
        let out = iterate(&two_diagonals(100), &config).unwrap();
        assert_eq!(out.covered_fraction, 1.0, "seed {seed}");
        assert!(out.rounds.len() <= 2);
        for round in &out.rounds {
            assert_eq!(round.report.result.forced_violations, 0);
            assert!(round.report.result.degree <= choose_degree(round.report.sampling.r as u64, 2));
        }
    }
}

#[test]
fn reports_are_a_function_of_input_and_config() {
    let config = PipelineConfig {
        seed: 9,
        ..PipelineConfig::new(100, 2, 1.0)
    };
    let a = iterate(&two_diagonals(100), &config).unwrap();
    let b = iterate(&two_diagonals(100), &config).unwrap();
    assert_eq!(a.product, b.product);
    assert_eq!(a.rounds, b.rounds);
}

#[test]
fn scattered_sets_report_partial_progress() {
    let pts: Vec<Point> = (1..=80u64).map(|i| vec![i % 97 + 1, (i * i * 31 + 7) % 97 + 1]).collect();
    let s = make_set(2, 97, pts).unwrap();
    let config = PipelineConfig {
        eps: 0.05,
        max_iterations: 3,
        ..PipelineConfig::new(97, 2, 1.0)
    };
    let out = match iterate(&s, &config) {
        Ok(out) => out,
        Err(Error::IterationBudgetExceeded(out)) => *out,
        Err(e) => panic!("{e}"),
    };
    // every round covers at least its own tuple
    for round in &out.rounds {
        assert!(round.newly_covered >= 1);
    }
    let degree_sum: u32 = out.polynomials.iter().map(|p| p.degree()).sum();
    assert_eq!(out.product.degree(), degree_sum);
    let mut log_bound: f64 = 0.0;
    let mut partial = out.polynomials[0].clone();
    log_bound += illdist::arith::ln_biguint(&partial.height());
    for p in &out.polynomials[1..] {
        log_bound += illdist::arith::ln_biguint(&p.height()) + (partial.term_count() as f64).ln();
        partial = partial.mul(p).unwrap();
    }
    assert!(illdist::arith::ln_biguint(&out.product.height()) <= log_bound + 1e-9);
    let covered = s.iter().filter(|x| out.product.evaluate(x).unwrap().is_zero()).count();
    assert_eq!(covered, out.covered_count);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn divisor_mass_never_exceeds_log_magnitude(m in any::<i64>().prop_filter("nonzero", |m| *m != 0), hi in 2u64..2000) {
        let primes = primes_up_to(hi);
        let w = divisor_weight_of_value(&BigInt::from(m), &primes);
        prop_assert!(w <= (m.unsigned_abs() as f64).ln() + 1e-9);
    }
}
