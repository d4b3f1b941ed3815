//! Randomized construction of a characteristic tuple `C` in `S^r` and of the
//! subset `S'` of points that `C` represents modulo many window primes.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lattice_sets::{LatticePointSet, Point};
use crate::residue::{chebyshev_mass, check_kappa, residue, tuple_classes};
use crate::seeded_rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingParams {
    pub eta: f64,
    /// Tuple length.
    pub r: usize,
    pub trials: usize,
    /// Target fraction of window primes at which `C` should be good.
    pub c1: f64,
    /// A tuple is good mod `p` when it represents at least `c2 |S|` points.
    pub c2: f64,
    /// Target density of `S'` in `S`.
    pub c3: f64,
    /// Coverage threshold, as a fraction of the window's Chebyshev mass.
    pub c4: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            eta: 1.0,
            r: 1,
            trials: 64,
            c1: 0.1,
            c2: 0.1,
            c3: 0.1,
            c4: 0.25,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::ZeroTrials);
        }
        if self.r == 0 {
            return Err(invalid("r must be at least 1"));
        }
        if self.eta.is_nan() || self.eta <= 0.0 {
            return Err(invalid(format!("eta must be positive, got {}", self.eta)));
        }
        for (name, c) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3), ("c4", self.c4)] {
            if !(c > 0.0 && c < 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1), got {c}")));
            }
        }
        Ok(())
    }
}

/// `ceil(eta (ln N)^(d kappa / (d - kappa)))`.
pub fn characteristic_size(n: u64, dim: usize, kappa: f64, eta: f64) -> Result<usize> {
    if n < 3 {
        return Err(invalid(format!("N must be at least 3, got {n}")));
    }
    check_kappa(dim, kappa)?;
    if !eta.is_finite() || eta <= 0.0 {
        return Err(invalid(format!("eta must be positive, got {eta}")));
    }
    let d = dim as f64;
    let r = eta * (n as f64).ln().powf(d * kappa / (d - kappa));
    Ok((r.ceil() as usize).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimeScore {
    pub prime: u64,
    pub good_x_count: usize,
    pub is_good: bool,
}

/// For each prime, how many points of `S` the tuple represents and whether
/// that reaches `c2 |S|`.
pub fn score_tuple(tuple: &[Point], set: &LatticePointSet, primes: &[u64], c2: f64) -> Result<Vec<PrimeScore>> {
    if let Some(bad) = tuple.iter().find(|c| c.len() != set.dim()) {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: bad.len(),
        });
    }
    let threshold = c2 * set.len() as f64;
    Ok(primes
        .iter()
        .map(|&p| {
            let classes = tuple_classes(tuple, p);
            let good_x_count = set.iter().filter(|x| classes.contains(&residue(x, p))).count();
            PrimeScore {
                prime: p,
                good_x_count,
                is_good: good_x_count as f64 >= threshold,
            }
        })
        .collect())
}

/// Sum of `ln p` over the primes at which `x` shares a class with `C`.
pub fn coverage_weight(x: &[u64], tuple: &[Point], primes: &[u64]) -> Result<f64> {
    if let Some(bad) = tuple.iter().find(|c| c.len() != x.len()) {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: bad.len(),
        });
    }
    Ok(primes
        .iter()
        .filter(|&&p| tuple.iter().any(|c| c.iter().zip(x).all(|(&a, &b)| a % p == b % p)))
        .map(|&p| (p as f64).ln())
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicSample {
    /// The tuple `C`, entries drawn from `S` with repetition.
    pub tuple: Vec<Point>,
    /// Window primes at which `C` is good.
    pub good_primes: Vec<u64>,
    /// `S'`, in canonical order.
    pub s_prime: Vec<Point>,
    /// Coverage weight of each point of `S'`.
    pub coverage: Vec<f64>,
    pub chebyshev_mass: f64,
    pub threshold: f64,
    /// Winning trial, or `None` when `|S| <= r` made sampling unnecessary.
    pub winning_trial: Option<usize>,
    /// Number of good primes reached by each trial.
    pub trial_scores: Vec<usize>,
    /// `C` is good at no fewer than `c1 |P_I|` primes.
    pub meets_c1: bool,
    /// `|S'| >= c3 |S|`.
    pub meets_c3: bool,
}

/// Class id of every point of `S` modulo one prime.
struct ClassIndex {
    class_of: Vec<u32>,
    classes: usize,
}

impl ClassIndex {
    fn new(set: &LatticePointSet, p: u64) -> Self {
        let mut ids: HashMap<Point, u32> = HashMap::new();
        let class_of = set
            .iter()
            .map(|x| {
                let next = ids.len() as u32;
                *ids.entry(residue(x, p)).or_insert(next)
            })
            .collect();
        ClassIndex {
            class_of,
            classes: ids.len(),
        }
    }

    fn good_count(&self, tuple_idx: &[usize], hit: &mut Vec<bool>) -> usize {
        hit.clear();
        hit.resize(self.classes, false);
        for &i in tuple_idx {
            hit[self.class_of[i] as usize] = true;
        }
        self.class_of.iter().filter(|&&c| hit[c as usize]).count()
    }
}

pub fn select_characteristic(
    set: &LatticePointSet,
    primes: &[u64],
    params: &SamplingParams,
    seed: u64,
) -> Result<CharacteristicSample> {
    params.validate()?;
    if primes.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let n = set.len();
    let mass = chebyshev_mass(primes);
    let threshold = params.c4 * mass;

    if n <= params.r {
        let tuple: Vec<Point> = set.iter().cycle().take(params.r).cloned().collect();
        return Ok(CharacteristicSample {
            tuple,
            good_primes: primes.to_vec(),
            s_prime: set.points().to_vec(),
            coverage: vec![mass; n],
            chebyshev_mass: mass,
            threshold,
            winning_trial: None,
            trial_scores: Vec::new(),
            meets_c1: true,
            meets_c3: true,
        });
    }

    let indices: Vec<ClassIndex> = primes.par_iter().map(|&p| ClassIndex::new(set, p)).collect();
    let good_threshold = params.c2 * n as f64;
    let trials: Vec<(Vec<usize>, usize)> = (0..params.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded_rng(seed, t as u64);
            let tuple_idx: Vec<usize> = (0..params.r).map(|_| rng.random_range(0..n)).collect();
            let mut hit = Vec::new();
            let score = indices
                .iter()
                .filter(|ix| ix.good_count(&tuple_idx, &mut hit) as f64 >= good_threshold)
                .count();
            (tuple_idx, score)
        })
        .collect();

    let mut winner = 0;
    for (t, (_, score)) in trials.iter().enumerate() {
        if *score > trials[winner].1 {
            winner = t;
        }
    }
    let tuple_idx = &trials[winner].0;
    let tuple: Vec<Point> = tuple_idx.iter().map(|&i| set.points()[i].clone()).collect();
    let good_primes: Vec<u64> = {
        let mut hit = Vec::new();
        primes
            .iter()
            .zip(&indices)
            .filter(|(_, ix)| ix.good_count(tuple_idx, &mut hit) as f64 >= good_threshold)
            .map(|(&p, _)| p)
            .collect()
    };

    // coverage(x) = sum of ln p over primes where x's class is hit by C
    let hits: Vec<Vec<bool>> = indices
        .iter()
        .map(|ix| {
            let mut hit = vec![false; ix.classes];
            for &i in tuple_idx {
                hit[ix.class_of[i] as usize] = true;
            }
            hit
        })
        .collect();
    let logs: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
    let coverage_all: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            indices
                .iter()
                .zip(&hits)
                .zip(&logs)
                .filter(|((ix, hit), _)| hit[ix.class_of[i] as usize])
                .map(|(_, &l)| l)
                .sum()
        })
        .collect();
    let (s_prime, coverage): (Vec<Point>, Vec<f64>) = set
        .iter()
        .zip(&coverage_all)
        .filter(|(_, &c)| c >= threshold)
        .map(|(x, &c)| (x.clone(), c))
        .unzip();

    Ok(CharacteristicSample {
        meets_c1: good_primes.len() as f64 >= params.c1 * primes.len() as f64,
        meets_c3: s_prime.len() as f64 >= params.c3 * n as f64,
        tuple,
        good_primes,
        s_prime,
        coverage,
        chebyshev_mass: mass,
        threshold,
        winning_trial: Some(winner),
        trial_scores: trials.iter().map(|(_, s)| *s).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodFractionEstimate {
    pub draws: usize,
    pub good: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of the fraction of good `(x, L)` pairs in
/// `S x S^r` modulo `p`.
pub fn estimate_good_fraction(
    set: &LatticePointSet,
    p: u64,
    r: usize,
    draws: usize,
    seed: u64,
) -> Result<GoodFractionEstimate> {
    if draws == 0 {
        return Err(invalid("at least one draw is required"));
    }
    let ix = ClassIndex::new(set, p);
    let n = set.len();
    let mut rng = seeded_rng(seed, u64::MAX);
    let mut good = 0;
    for _ in 0..draws {
        let x = rng.random_range(0..n);
        let cx = ix.class_of[x];
        if (0..r).any(|_| ix.class_of[rng.random_range(0..n)] == cx) {
            good += 1;
        }
    }
    let mean = good as f64 / draws as f64;
    Ok(GoodFractionEstimate {
        draws,
        good,
        mean,
        std_error: (mean * (1.0 - mean) / draws as f64).sqrt(),
    })
}
