//! Finite point sets in `[N]^d` and generators for the standard families of
//! sets that occupy few residue classes.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::index;

use crate::error::{invalid, Error, Result};
use crate::primes::primes_up_to;
use crate::seeded_rng;

/// A lattice point with coordinates in `[1, N]`.
pub type Point = Vec<u64>;

/// A nonempty set of distinct points in `[1, N]^d`, stored in lexicographic
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePointSet {
    dim: usize,
    box_bound: u64,
    points: Vec<Point>,
}

impl LatticePointSet {
    /// Validates, deduplicates and sorts `raw_points`.
    pub fn new(dim: usize, box_bound: u64, raw_points: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if box_bound < 2 {
            return Err(invalid(format!("box bound must be at least 2, got {box_bound}")));
        }
        for p in &raw_points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if let Some(&value) = p.iter().find(|&&c| c == 0 || c > box_bound) {
                return Err(Error::CoordinateOutOfRange {
                    point: p.clone(),
                    value,
                    bound: box_bound,
                });
            }
        }
        let mut points = raw_points;
        points.sort_unstable();
        points.dedup();
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(LatticePointSet {
            dim,
            box_bound,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_bound(&self) -> u64 {
        self.box_bound
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, point: &[u64]) -> bool {
        self.points
            .binary_search_by(|p| p.as_slice().cmp(point))
            .is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    /// The subset of points satisfying `keep`, or `EmptySet`.
    pub fn filter(&self, mut keep: impl FnMut(&Point) -> bool) -> Result<Self> {
        let points: Vec<Point> = self.points.iter().filter(|p| keep(p)).cloned().collect();
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(LatticePointSet {
            dim: self.dim,
            box_bound: self.box_bound,
            points,
        })
    }
}

impl<'a> IntoIterator for &'a LatticePointSet {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

pub fn make_set(dim: usize, box_bound: u64, raw_points: Vec<Point>) -> Result<LatticePointSet> {
    LatticePointSet::new(dim, box_bound, raw_points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrtMode {
    /// Subsample `floor((ln N)^eps)` points of the full construction over
    /// all primes `<= ln N`.
    Small,
    /// Every `x` in `[N]` hitting one chosen residue for each prime
    /// `p <= min(prime_bound, ln N)`.
    Full { prime_bound: u64 },
}

/// Parameters for one of the generator families.
#[derive(Debug, Clone)]
pub enum GeneratorSpec {
    Crt {
        epsilon: f64,
        mode: CrtMode,
        seed: u64,
    },
    Product {
        factor: LatticePointSet,
        power: usize,
    },
    Perturbed {
        f_coeffs: Vec<i64>,
        factor: Vec<u64>,
    },
    GraphShift {
        rho: f64,
        degree: u32,
        shifts: Vec<u64>,
    },
}

impl GeneratorSpec {
    pub fn generate(&self, n: u64) -> Result<LatticePointSet> {
        match self {
            GeneratorSpec::Crt {
                epsilon,
                mode,
                seed,
            } => gen_crt_set(n, *epsilon, *mode, *seed),
            GeneratorSpec::Product { factor, power } => gen_product_set(factor, *power),
            GeneratorSpec::Perturbed { f_coeffs, factor } => gen_perturbed_set(n, f_coeffs, factor),
            GeneratorSpec::GraphShift {
                rho,
                degree,
                shifts,
            } => gen_graph_shift_set(n, *rho, *degree, shifts),
        }
    }
}

/// Number of residues kept mod `p`: `floor(p^eps)`, at least one.
pub fn residues_per_prime(p: u64, epsilon: f64) -> u64 {
    ((p as f64).powf(epsilon).floor() as u64).clamp(1, p)
}

/// All `x` in `[1, n]` such that, for each `(p, allowed)`, `x mod p` is one
/// of `allowed`. The moduli must be distinct primes.
pub fn crt_residue_set(n: u64, constraints: &[(u64, Vec<u64>)]) -> Result<LatticePointSet> {
    if n < 2 {
        return Err(invalid("N must be at least 2"));
    }
    let mut modulus: u64 = 1;
    let mut classes: Vec<u64> = vec![0];
    for (p, allowed) in constraints {
        let p = *p;
        if allowed.is_empty() || allowed.iter().any(|&a| a >= p) {
            return Err(invalid(format!("residues for modulus {p} must be nonempty and < {p}")));
        }
        let next = modulus
            .checked_mul(p)
            .filter(|&m| m <= n)
            .ok_or_else(|| {
                Error::GenerationFailed(format!(
                    "product of the moduli exceeds N = {n}; lower the prime bound"
                ))
            })?;
        let inv = mod_inverse(modulus % p, p);
        let mut combined = Vec::with_capacity(classes.len() * allowed.len());
        for &c in &classes {
            for &a in allowed {
                // x = c + modulus * t with t = (a - c) * modulus^{-1} mod p
                let diff = (a + p - c % p) % p;
                let t = (diff as u128 * inv as u128 % p as u128) as u64;
                combined.push(c + modulus * t);
            }
        }
        modulus = next;
        classes = combined;
    }
    let mut points = Vec::new();
    for &c in &classes {
        let mut x = if c == 0 { modulus } else { c };
        while x <= n {
            points.push(vec![x]);
            x += modulus;
        }
    }
    if points.is_empty() {
        return Err(Error::GenerationFailed("no integer in [1, N] meets every residue constraint".into()));
    }
    LatticePointSet::new(1, n, points)
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    if p == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "moduli must be coprime");
    old_s.rem_euclid(p as i128) as u64
}

/// One-dimensional sets occupying at most `floor(p^eps)` classes for the
/// small primes, built by the Chinese remainder theorem.
pub fn gen_crt_set(n: u64, epsilon: f64, mode: CrtMode, seed: u64) -> Result<LatticePointSet> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if n < 16 {
        return Err(invalid(format!("N must be at least 16, got {n}")));
    }
    let ln_n = (n as f64).ln();
    let cap = match mode {
        CrtMode::Small => ln_n.floor() as u64,
        CrtMode::Full { prime_bound } => {
            if prime_bound < 2 {
                return Err(invalid("prime bound must be at least 2"));
            }
            prime_bound.min(ln_n.floor() as u64)
        }
    };
    let mut rng = seeded_rng(seed, 0);
    let constraints: Vec<(u64, Vec<u64>)> = primes_up_to(cap)
        .into_iter()
        .map(|p| {
            let k = residues_per_prime(p, epsilon);
            let mut chosen: Vec<u64> = index::sample(&mut rng, p as usize, k as usize)
                .into_iter()
                .map(|i| i as u64)
                .collect();
            chosen.sort_unstable();
            (p, chosen)
        })
        .collect();
    let full = crt_residue_set(n, &constraints)?;
    match mode {
        CrtMode::Full { .. } => Ok(full),
        CrtMode::Small => {
            let k = (ln_n.powf(epsilon).floor() as usize).max(1);
            if full.len() <= k {
                return Ok(full);
            }
            let picked = index::sample(&mut rng, full.len(), k)
                .into_iter()
                .map(|i| full.points[i].clone())
                .collect();
            LatticePointSet::new(1, n, picked)
        }
    }
}

/// The Cartesian power `X^power` of a one-dimensional set.
pub fn gen_product_set(factor: &LatticePointSet, power: usize) -> Result<LatticePointSet> {
    if factor.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: factor.dim(),
        });
    }
    if power == 0 {
        return Err(invalid("power must be at least 1"));
    }
    let values: Vec<u64> = factor.iter().map(|p| p[0]).collect();
    let mut points: Vec<Point> = vec![Vec::with_capacity(power)];
    for _ in 0..power {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    LatticePointSet::new(power, factor.box_bound(), points)
}

fn eval_univariate(coeffs: &[i64], x: u64) -> BigInt {
    let x = BigInt::from(x);
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, &c| acc * &x + BigInt::from(c))
}

fn validate_factor(values: &[u64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptySet);
    }
    if values.contains(&0) {
        return Err(invalid(format!("{what} must contain positive integers only")));
    }
    Ok(())
}

/// `{(x, f(x) y) : x in [N], y in Y}` clipped to the box. `f_coeffs` lists
/// the coefficients of `f` from the constant term upwards.
pub fn gen_perturbed_set(n: u64, f_coeffs: &[i64], factor: &[u64]) -> Result<LatticePointSet> {
    validate_factor(factor, "Y")?;
    if n < 2 {
        return Err(invalid("N must be at least 2"));
    }
    let bound = BigInt::from(n);
    let mut points = Vec::new();
    for x in 1..=n {
        let fx = eval_univariate(f_coeffs, x);
        if !fx.is_positive() || fx > bound {
            continue;
        }
        let fx = fx.to_u64().expect("bounded by N");
        for &y in factor {
            if let Some(v) = fx.checked_mul(y).filter(|&v| v <= n) {
                points.push(vec![x, v]);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    LatticePointSet::new(2, n, points)
}

/// `{(x, floor(N^rho) x^m + z) : x >= 1, z in Z}` clipped to the box.
pub fn gen_graph_shift_set(n: u64, rho: f64, degree: u32, shifts: &[u64]) -> Result<LatticePointSet> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(format!("rho must lie in [0, 1), got {rho}")));
    }
    if degree == 0 {
        return Err(invalid("degree m must be at least 1"));
    }
    validate_factor(shifts, "Z")?;
    if n < 2 {
        return Err(invalid("N must be at least 2"));
    }
    let scale = ((n as f64).powf(rho).floor() as u128).max(1);
    let min_shift = *shifts.iter().min().expect("nonempty") as u128;
    let mut points = Vec::new();
    for x in 1..=n {
        let fx = (x as u128)
            .checked_pow(degree)
            .and_then(|v| v.checked_mul(scale));
        let fx = match fx {
            Some(v) if v + min_shift <= n as u128 => v,
            _ => break,
        };
        for &z in shifts {
            let y = fx + z as u128;
            if y <= n as u128 {
                points.push(vec![x, y as u64]);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    LatticePointSet::new(2, n, points)
}
