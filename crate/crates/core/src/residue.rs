//! Prime windows, residue-class occupancy and the good/bad tuple statistics.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::CompensatedSum;
use crate::error::{invalid, Error, Result};
use crate::lattice_sets::{LatticePointSet, Point};
use crate::primes::{is_prime, primes_in_range};

/// The primes in `[tau (ln N)^(d/(d-kappa)), 2 tau (ln N)^(d/(d-kappa))]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeWindow {
    pub dim: usize,
    pub kappa: f64,
    pub tau: f64,
    pub lower: f64,
    pub upper: f64,
    pub primes: Vec<u64>,
    pub chebyshev_mass: f64,
}

impl PrimeWindow {
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Interval length `upper - lower`.
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

pub(crate) fn check_kappa(dim: usize, kappa: f64) -> Result<()> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(kappa >= 0.0 && kappa < dim as f64) {
        return Err(invalid(format!("kappa must satisfy 0 <= kappa < d = {dim}, got {kappa}")));
    }
    Ok(())
}

/// Sum of `ln p` over `primes`.
pub fn chebyshev_mass(primes: &[u64]) -> f64 {
    primes.iter().map(|&p| (p as f64).ln()).sum()
}

pub fn primes_in_window(n: u64, dim: usize, kappa: f64, tau: f64) -> Result<PrimeWindow> {
    if n < 3 {
        return Err(invalid(format!("N must be at least 3, got {n}")));
    }
    check_kappa(dim, kappa)?;
    if !tau.is_finite() || tau <= 0.0 {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    let exponent = dim as f64 / (dim as f64 - kappa);
    let lower = tau * (n as f64).ln().powf(exponent);
    let upper = 2.0 * lower;
    if lower < 2.0 {
        return Err(Error::WindowBelowTwo { lower });
    }
    if upper >= u64::MAX as f64 / 2.0 {
        return Err(invalid("prime window exceeds the 64-bit range"));
    }
    let primes = primes_in_range(lower.ceil() as u64, upper.floor() as u64);
    let chebyshev_mass = chebyshev_mass(&primes);
    Ok(PrimeWindow {
        dim,
        kappa,
        tau,
        lower,
        upper,
        primes,
        chebyshev_mass,
    })
}

/// Coordinatewise reduction of a point into `[0, p)^d`.
pub fn residue(x: &[u64], p: u64) -> Point {
    x.iter().map(|&c| c % p).collect()
}

/// Occupied residue classes of a set modulo `p`, with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueProfile {
    pub prime: u64,
    pub class_counts: BTreeMap<Point, usize>,
    pub total: usize,
}

impl ResidueProfile {
    /// Builds a profile directly from class counts.
    pub fn from_counts(prime: u64, counts: impl IntoIterator<Item = (Point, usize)>) -> Self {
        let class_counts: BTreeMap<Point, usize> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        let total = class_counts.values().sum();
        ResidueProfile {
            prime,
            class_counts,
            total,
        }
    }

    pub fn occupancy(&self) -> usize {
        self.class_counts.len()
    }

    /// `S_a` for every occupied class, in class order.
    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        let total = self.total as f64;
        self.class_counts.values().map(move |&c| c as f64 / total)
    }

    pub fn exact_frequencies(&self) -> impl Iterator<Item = BigRational> + '_ {
        let total = BigInt::from(self.total);
        self.class_counts
            .values()
            .map(move |&c| BigRational::new(BigInt::from(c), total.clone()))
    }
}

pub fn occupancy_profile(set: &LatticePointSet, p: u64) -> Result<ResidueProfile> {
    if !is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    let mut class_counts = BTreeMap::new();
    for x in set {
        *class_counts.entry(residue(x, p)).or_insert(0) += 1;
    }
    Ok(ResidueProfile {
        prime: p,
        class_counts,
        total: set.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeOccupancy {
    pub prime: u64,
    pub occupancy: usize,
    pub limit: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IllDistributionReport {
    pub kappa: f64,
    pub c_bound: f64,
    pub per_prime: Vec<PrimeOccupancy>,
    pub passed: bool,
    /// Set when the window had no primes to test.
    pub warning: Option<String>,
}

/// Flags every prime whose occupancy exceeds `c_bound * p^kappa`.
pub fn check_ill_distribution(
    set: &LatticePointSet,
    primes: &[u64],
    kappa: f64,
    c_bound: f64,
) -> Result<IllDistributionReport> {
    if c_bound.is_nan() || c_bound <= 0.0 {
        return Err(invalid(format!("c_bound must be positive, got {c_bound}")));
    }
    if kappa.is_nan() || kappa < 0.0 {
        return Err(invalid(format!("kappa must be nonnegative, got {kappa}")));
    }
    let per_prime = primes
        .par_iter()
        .map(|&p| {
            let occupancy = occupancy_profile(set, p)?.occupancy();
            let limit = c_bound * (p as f64).powf(kappa);
            Ok(PrimeOccupancy {
                prime: p,
                occupancy,
                limit,
                flagged: occupancy as f64 > limit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = per_prime.iter().all(|o| !o.flagged);
    let warning = primes
        .is_empty()
        .then(|| "prime window is empty; the check passes vacuously".to_string());
    Ok(IllDistributionReport {
        kappa,
        c_bound,
        per_prime,
        passed,
        warning,
    })
}

/// Whether some entry of `tuple` is congruent to `x` modulo `p` in every
/// coordinate.
pub fn is_good_tuple(x: &[u64], tuple: &[Point], p: u64) -> Result<bool> {
    for c in tuple {
        if c.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: c.len(),
            });
        }
    }
    Ok(tuple
        .iter()
        .any(|c| c.iter().zip(x).all(|(&a, &b)| a % p == b % p)))
}

/// Residue classes hit by a tuple modulo `p`.
pub(crate) fn tuple_classes(tuple: &[Point], p: u64) -> HashSet<Point> {
    tuple.iter().map(|c| residue(c, p)).collect()
}

/// Probability that a uniform `x` in `S` and an independent uniform
/// `L` in `S^r` form a bad tuple: `sum_a S_a (1 - S_a)^r`.
pub fn bad_tuple_probability(profile: &ResidueProfile, r: u32) -> f64 {
    profile
        .frequencies()
        .map(|s| s * (1.0 - s).powi(r as i32))
        .collect::<CompensatedSum>()
        .value()
}

/// Largest profile accepted by [`bad_tuple_probability_exact`].
pub const EXACT_PROFILE_LIMIT: usize = 64;

/// The same probability in exact rational arithmetic.
pub fn bad_tuple_probability_exact(profile: &ResidueProfile, r: u32) -> Result<BigRational> {
    if profile.total > EXACT_PROFILE_LIMIT {
        return Err(invalid(format!(
            "exact mode supports at most {EXACT_PROFILE_LIMIT} points, profile has {}",
            profile.total
        )));
    }
    let one = BigRational::one();
    Ok(profile
        .exact_frequencies()
        .map(|s| {
            let miss = &one - &s;
            s * num_traits::pow(miss, r as usize)
        })
        .fold(BigRational::zero(), |acc, t| acc + t))
}

/// Split of the bad-tuple sum into classes with `S_a <= 1/r` (light) and
/// `S_a > 1/r` (heavy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadTupleSplit {
    pub light: f64,
    pub heavy: f64,
}

pub fn bad_tuple_split(profile: &ResidueProfile, r: u32) -> BadTupleSplit {
    let mut light = CompensatedSum::default();
    let mut heavy = CompensatedSum::default();
    for (&count, s) in profile.class_counts.values().zip(profile.frequencies()) {
        let term = s * (1.0 - s).powi(r as i32);
        // S_a <= 1/r  <=>  r * count <= total
        if r as usize * count <= profile.total {
            light.add(term);
        } else {
            heavy.add(term);
        }
    }
    BadTupleSplit {
        light: light.value(),
        heavy: heavy.value(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_sets::make_set;

    fn diagonal(n: u64) -> LatticePointSet {
        make_set(2, n, (1..=n).map(|i| vec![i, i]).collect()).unwrap()
    }

    #[test]
    fn window_examples() {
        let w = primes_in_window(22026, 1, 0.5, 1.0).unwrap();
        assert!((w.lower - 100.0).abs() < 0.01 && (w.upper - 200.0).abs() < 0.01);
        assert_eq!(w.primes.len(), 21);
        assert_eq!((w.primes[0], *w.primes.last().unwrap()), (101, 199));

        // ln 1097 = 7.00033 puts 7 just outside the closed window
        let w = primes_in_window(1097, 1, 0.0, 1.0).unwrap();
        assert_eq!(w.primes, vec![11, 13]);
        let w = primes_in_window(1096, 1, 0.0, 1.0).unwrap();
        assert_eq!(w.primes, vec![7, 11, 13]);
        assert!((w.chebyshev_mass - (7f64 * 11.0 * 13.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn window_errors() {
        assert!(matches!(primes_in_window(100, 2, 2.0, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(primes_in_window(100, 2, 1.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(primes_in_window(100, 1, 0.0, 0.1), Err(Error::WindowBelowTwo { .. })));
    }

    #[test]
    fn profile_examples() {
        let s = make_set(2, 10, vec![vec![1, 1], vec![2, 2], vec![3, 3]]).unwrap();
        let p2 = occupancy_profile(&s, 2).unwrap();
        assert_eq!(p2.class_counts, BTreeMap::from([(vec![0, 0], 1), (vec![1, 1], 2)]));
        let p3 = occupancy_profile(&s, 3).unwrap();
        assert_eq!(p3.occupancy(), 3);
        assert!(p3.class_counts.values().all(|&c| c == 1));
        let single = make_set(1, 10, vec![vec![5]]).unwrap();
        let p5 = occupancy_profile(&single, 5).unwrap();
        assert_eq!(p5.class_counts, BTreeMap::from([(vec![0], 1)]));
        assert!(occupancy_profile(&s, 4).is_err());
    }

    #[test]
    fn ill_distribution_checks() {
        let report = check_ill_distribution(&diagonal(50), &[19, 23], 0.5, 1.0).unwrap();
        assert!(!report.passed);
        assert_eq!(
            report.per_prime.iter().map(|o| o.occupancy).collect::<Vec<_>>(),
            vec![19, 23]
        );

        let ones = make_set(1, 100, (1..=100).filter(|x| x % 6 == 1).map(|x| vec![x]).collect()).unwrap();
        let report = check_ill_distribution(&ones, &[2, 3], 0.5, 1.0).unwrap();
        assert!(report.passed && report.warning.is_none());

        let vacuous = check_ill_distribution(&ones, &[], 0.5, 1.0).unwrap();
        assert!(vacuous.passed && vacuous.warning.is_some());
    }

    #[test]
    fn good_tuples() {
        let l = vec![vec![3], vec![7]];
        assert!(is_good_tuple(&[5], &l, 2).unwrap());
        assert!(!is_good_tuple(&[5], &l, 5).unwrap());
        assert!(is_good_tuple(&[7], &l, 97).unwrap());
        assert!(is_good_tuple(&[5], &[vec![1, 2]], 2).is_err());
    }

    #[test]
    fn bad_probability_examples() {
        let half = ResidueProfile::from_counts(2, [(vec![0], 1), (vec![1], 1)]);
        assert_eq!(bad_tuple_probability(&half, 2), 0.25);
        assert_eq!(
            bad_tuple_probability_exact(&half, 2).unwrap(),
            BigRational::new(1.into(), 4.into())
        );
        assert_eq!(bad_tuple_probability(&half, 0), 1.0);
    }
}
