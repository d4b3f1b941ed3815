//! Small-height integer polynomials vanishing on a prescribed point set.
//!
//! Given `m` points in `[N]^d` and a degree `D` with `m < R = binomial(D+d, d)`,
//! the pigeonhole principle guarantees a nonzero integer polynomial of degree
//! at most `D` vanishing on the points with every coefficient bounded by
//! `4 (R N^D)^(m / (R - m))`. [`solve_vanishing`] finds one constructively:
//! it computes an LLL-reduced basis of the integer kernel of the monomial
//! evaluation matrix and picks the lowest-height vector, falling back to an
//! exhaustive search of coefficient boxes when reduction alone overshoots.

pub mod lattice;
pub mod polynomial;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{binomial, factorial, integer_root, ln_biguint};
use crate::error::{Error, Result};
use crate::lattice_sets::{LatticePointSet, Point};

pub use polynomial::{measure_polynomial, monomials_up_to, IntegerPolynomial, Monomial, PolynomialMeasure};

/// Degree for a Siegel instance with `r` interpolation points in dimension
/// `d`: strictly above `(d! r)^(1/d)`, and large enough that
/// `binomial(D + d, d) >= 2 r`.
pub fn choose_degree(r: u64, d: u32) -> u32 {
    assert!(r >= 1 && d >= 1, "r and d must be positive");
    let first = integer_root(factorial(d as u64).saturating_mul(r), d) + 1;
    let target = r.saturating_mul(2);
    let mut second = 0u64;
    while binomial(second + d as u64, d as u64) < target {
        second += 1;
    }
    first.max(second) as u32
}

/// `binomial(D + d, d)`, the number of monomials of degree `<= D`.
pub fn monomial_count(dim: usize, degree: u32) -> u64 {
    binomial(degree as u64 + dim as u64, dim as u64)
}

/// Above this many bits the bound is compared in log space only.
const EXACT_BOUND_BITS: f64 = 4096.0;

/// The coefficient bound `4 (R N^D)^(m / (R - m))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelBound {
    pub dim: usize,
    pub degree: u32,
    pub box_bound: u64,
    pub points: u64,
    pub monomials: u64,
    /// Natural logarithm of the bound.
    pub ln: f64,
}

impl SiegelBound {
    pub fn new(dim: usize, degree: u32, box_bound: u64, points: u64) -> Result<Self> {
        let monomials = monomial_count(dim, degree);
        if points >= monomials {
            return Err(Error::Overdetermined {
                points: points as usize,
                monomials: monomials as usize,
                degree,
            });
        }
        let ratio = points as f64 / (monomials - points) as f64;
        let ln = 4f64.ln() + ratio * ((monomials as f64).ln() + degree as f64 * (box_bound as f64).ln());
        Ok(SiegelBound {
            dim,
            degree,
            box_bound,
            points,
            monomials,
            ln,
        })
    }

    /// Whether `height` respects the bound.
    ///
    /// Exact when the bound fits in 4096 bits: compares
    /// `height^(R-m)` with `4^(R-m) (R N^D)^m`.
    pub fn admits(&self, height: &BigUint) -> bool {
        if height.is_zero() {
            return true;
        }
        if self.ln / std::f64::consts::LN_2 > EXACT_BOUND_BITS {
            return ln_biguint(height) <= self.ln * (1.0 + 1e-12);
        }
        let free = (self.monomials - self.points) as u32;
        let lhs = height.pow(free);
        let base = BigUint::from(self.monomials) * BigUint::from(self.box_bound).pow(self.degree);
        let rhs = BigUint::from(4u8).pow(free) * base.pow(self.points as u32);
        lhs <= rhs
    }

    /// The largest integer height the bound admits, when the bound is small
    /// enough to enumerate against.
    pub fn max_height(&self) -> Option<BigUint> {
        if self.ln > 40.0 {
            return None;
        }
        let mut lo = BigUint::zero();
        let mut hi = BigUint::from(self.ln.exp().ceil() as u64 + 2);
        while self.admits(&hi) {
            hi *= 2u8;
        }
        // invariant: admits(lo), !admits(hi)
        while &hi - &lo > BigUint::one() {
            let mid = (&lo + &hi) >> 1u8;
            if self.admits(&mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }
}

/// Natural log of the coefficient bound for `m` points.
pub fn siegel_bound(dim: usize, degree: u32, box_bound: u64, m: u64) -> Result<f64> {
    SiegelBound::new(dim, degree, box_bound, m).map(|b| b.ln)
}

#[derive(Debug, Clone)]
pub struct SiegelInstance {
    pub sigma: LatticePointSet,
    pub degree: u32,
    pub bound: SiegelBound,
}

impl SiegelInstance {
    pub fn new(sigma: LatticePointSet, degree: u32) -> Result<Self> {
        let bound = SiegelBound::new(sigma.dim(), degree, sigma.box_bound(), sigma.len() as u64)?;
        Ok(SiegelInstance { sigma, degree, bound })
    }

    pub fn monomials(&self) -> u64 {
        self.bound.monomials
    }

    pub fn log_height_bound(&self) -> f64 {
        self.bound.ln
    }
}

/// Rows `(mono_j(s))_j` for every point `s`.
pub fn evaluation_matrix(points: &[Point], monomials: &[Monomial]) -> Vec<Vec<BigInt>> {
    points
        .iter()
        .map(|s| {
            monomials
                .iter()
                .map(|m| {
                    m.exponents()
                        .iter()
                        .zip(s)
                        .fold(BigInt::one(), |acc, (&e, &x)| acc * BigInt::from(x).pow(e))
                })
                .collect()
        })
        .collect()
}

fn vector_height(v: &[BigInt]) -> BigUint {
    v.iter().map(|x| x.magnitude().clone()).max().unwrap_or_default()
}

/// Candidate search budget for exhaustive coefficient-box enumeration.
pub const BRUTE_FORCE_LIMIT: u64 = 100_000_000;

/// A nonzero polynomial of degree `<= D` vanishing on `Σ` whose height
/// respects the coefficient bound.
pub fn solve_vanishing(instance: &SiegelInstance) -> Result<IntegerPolynomial> {
    let dim = instance.sigma.dim();
    let monomials = monomials_up_to(dim, instance.degree);
    let rows = evaluation_matrix(instance.sigma.points(), &monomials);
    let kernel = lattice::integer_kernel(&rows, monomials.len())?;
    if kernel.is_empty() {
        return Err(Error::Internal("integer kernel is trivial despite |Σ| < R".into()));
    }

    let mut best = kernel
        .iter()
        .min_by(|a, b| vector_height(a).cmp(&vector_height(b)))
        .expect("nonempty")
        .clone();
    if !instance.bound.admits(&vector_height(&best)) {
        // pairwise sums and differences of reduced vectors
        for i in 0..kernel.len() {
            for j in i + 1..kernel.len() {
                for sign in [1i8, -1] {
                    let cand: Vec<BigInt> = kernel[i]
                        .iter()
                        .zip(&kernel[j])
                        .map(|(a, b)| if sign > 0 { a + b } else { a - b })
                        .collect();
                    if vector_height(&cand) < vector_height(&best) {
                        best = cand;
                    }
                }
            }
        }
    }

    let poly = if instance.bound.admits(&vector_height(&best)) {
        IntegerPolynomial::from_coefficients(dim, &monomials, &best)?.normalized()
    } else {
        let cap = instance.bound.max_height().ok_or_else(|| {
            Error::Internal("reduced kernel vector exceeds a bound too large to enumerate".into())
        })?;
        let cap = cap.to_u64().unwrap_or(u64::MAX);
        match brute_force_min_height(&instance.sigma, instance.sigma.box_bound(), instance.degree, cap) {
            Ok(Some(p)) => p.normalized(),
            Ok(None) => {
                return Err(Error::Internal(
                    "exhaustive search found no polynomial within the coefficient bound".into(),
                ))
            }
            Err(e) => return Err(Error::Internal(format!("exhaustive fallback unavailable: {e}"))),
        }
    };

    for s in instance.sigma.iter() {
        if !poly.evaluate(s)?.is_zero() {
            return Err(Error::Internal(format!("solver output does not vanish at {s:?}")));
        }
    }
    if poly.degree() > instance.degree || !instance.bound.admits(&poly.height()) {
        return Err(Error::Internal("solver output violates the degree or height bound".into()));
    }
    Ok(poly)
}

/// Exhaustive search of all coefficient vectors with entries in
/// `[-h_max, h_max]` for a nonzero polynomial of degree `<= D` vanishing on
/// `sigma`. Returns one of minimal height, the first found in order of
/// increasing height.
pub fn brute_force_min_height(
    sigma: &LatticePointSet,
    box_bound: u64,
    degree: u32,
    h_max: u64,
) -> Result<Option<IntegerPolynomial>> {
    for s in sigma.iter() {
        if s.iter().any(|&c| c > box_bound) {
            return Err(Error::CoordinateOutOfRange {
                point: s.clone(),
                value: *s.iter().max().expect("nonempty"),
                bound: box_bound,
            });
        }
    }
    let dim = sigma.dim();
    let monomials = monomials_up_to(dim, degree);
    let r = monomials.len();
    let candidates = (2.0 * h_max as f64 + 1.0).powi(r as i32);
    if candidates > BRUTE_FORCE_LIMIT as f64 {
        return Err(Error::SearchSpaceTooLarge {
            candidates,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if h_max == 0 {
        return Ok(None);
    }
    let rows = evaluation_matrix(sigma.points(), &monomials);
    // entries are at most N^D; residuals stay below R * h_max * N^D
    let max_entry = rows.iter().flatten().map(|x| x.magnitude().clone()).max().unwrap_or_default();
    let worst = max_entry * BigUint::from(r as u64) * BigUint::from(h_max) * 4u8;
    if worst.bits() > 120 {
        return Err(Error::SearchSpaceTooLarge {
            candidates,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    // column-major for cheap residual updates
    let columns: Vec<Vec<i128>> = (0..r)
        .map(|j| rows.iter().map(|row| row[j].to_i128().expect("checked width")).collect())
        .collect();

    for h in 1..=h_max as i64 {
        // shell: first coordinate with |c_j| = h sits at `lead`
        for lead in 0..r {
            let ranges: Vec<Vec<i64>> = (0..r)
                .map(|j| {
                    if j < lead {
                        (-(h - 1)..=h - 1).collect()
                    } else if j == lead {
                        vec![-h, h]
                    } else {
                        (-h..=h).collect()
                    }
                })
                .collect();
            if let Some(coeffs) = search_box(&columns, &ranges) {
                let coeffs: Vec<BigInt> = coeffs.into_iter().map(BigInt::from).collect();
                return IntegerPolynomial::from_coefficients(dim, &monomials, &coeffs).map(Some);
            }
        }
    }
    Ok(None)
}

/// Odometer over the product of `ranges`, returning the first vector `c`
/// with `sum_j c_j * columns[j] = 0`.
fn search_box(columns: &[Vec<i128>], ranges: &[Vec<i64>]) -> Option<Vec<i64>> {
    let r = ranges.len();
    let m = columns.first().map_or(0, Vec::len);
    if ranges.iter().any(Vec::is_empty) {
        return None;
    }
    let mut idx = vec![0usize; r];
    let mut coeffs: Vec<i64> = ranges.iter().map(|rg| rg[0]).collect();
    let mut residual = vec![0i128; m];
    for j in 0..r {
        for i in 0..m {
            residual[i] += coeffs[j] as i128 * columns[j][i];
        }
    }
    loop {
        if residual.iter().all(|&x| x == 0) {
            return Some(coeffs);
        }
        // advance the last coordinate fastest
        let mut j = r;
        loop {
            if j == 0 {
                return None;
            }
            j -= 1;
            let old = coeffs[j];
            if idx[j] + 1 < ranges[j].len() {
                idx[j] += 1;
                coeffs[j] = ranges[j][idx[j]];
            } else {
                idx[j] = 0;
                coeffs[j] = ranges[j][0];
            }
            let delta = (coeffs[j] - old) as i128;
            for i in 0..m {
                residual[i] += delta * columns[j][i];
            }
            if idx[j] != 0 {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_sets::make_set;

    #[test]
    fn degree_choices() {
        assert_eq!(choose_degree(3, 2), 3);
        assert_eq!(choose_degree(1, 1), 2);
        assert_eq!(choose_degree(100, 2), 19);
    }

    #[test]
    fn chosen_degree_meets_both_conditions() {
        for d in 1..=4u32 {
            for r in 1..=300u64 {
                let deg = choose_degree(r, d);
                let lhs = (factorial(d as u64) as f64 * r as f64).powf(1.0 / d as f64);
                assert!((deg as f64) > lhs - 1e-9, "r={r} d={d}");
                assert!(monomial_count(d as usize, deg) >= 2 * r);
            }
        }
    }

    #[test]
    fn bound_spot_values() {
        let ln = siegel_bound(1, 2, 10, 2).unwrap();
        assert!((ln - 360000f64.ln()).abs() < 1e-9);
        assert!((siegel_bound(2, 3, 10, 0).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!(matches!(siegel_bound(1, 1, 10, 2), Err(Error::Overdetermined { .. })));

        let b = SiegelBound::new(1, 2, 10, 2).unwrap();
        assert!(b.admits(&BigUint::from(360000u32)));
        assert!(!b.admits(&BigUint::from(360001u32)));
        assert_eq!(b.max_height(), Some(BigUint::from(360000u32)));
    }

    #[test]
    fn bound_with_fractional_exponent() {
        // d=2, D=2, R=6, m=1: 4 * (6 * 2500)^(1/5) = 27.39...
        let b = SiegelBound::new(2, 2, 50, 1).unwrap();
        assert_eq!(b.max_height(), Some(BigUint::from(27u8)));
    }

    #[test]
    fn solver_on_diagonal_pair() {
        let sigma = make_set(2, 10, vec![vec![1, 1], vec![2, 2]]).unwrap();
        let inst = SiegelInstance::new(sigma, 1).unwrap();
        let p = solve_vanishing(&inst).unwrap();
        assert_eq!(p.height(), BigUint::from(1u8));
        assert_eq!(p.to_string(), "x1 - x2");
    }

    #[test]
    fn solver_on_single_point() {
        let sigma = make_set(1, 10, vec![vec![2]]).unwrap();
        let p = solve_vanishing(&SiegelInstance::new(sigma, 1).unwrap()).unwrap();
        assert_eq!(p.to_string(), "x1 - 2");
    }

    #[test]
    fn overdetermined_instance() {
        let sigma = make_set(1, 10, vec![vec![1], vec![3]]).unwrap();
        assert!(matches!(SiegelInstance::new(sigma, 1), Err(Error::Overdetermined { .. })));
    }

    #[test]
    fn brute_force_examples() {
        let diag = make_set(2, 10, vec![vec![1, 1], vec![2, 2]]).unwrap();
        let p = brute_force_min_height(&diag, 10, 1, 1).unwrap().unwrap();
        assert_eq!(p.height(), BigUint::from(1u8));
        assert_eq!(p.normalized().to_string(), "x1 - x2");

        let pair = make_set(1, 10, vec![vec![1], vec![3]]).unwrap();
        let q = brute_force_min_height(&pair, 10, 2, 6).unwrap().unwrap();
        assert_eq!(q.normalized().to_string(), "x1^2 - 4*x1 + 3");

        assert!(brute_force_min_height(&pair, 10, 2, 3).unwrap().is_none());
        assert!(brute_force_min_height(&pair, 10, 2, 0).unwrap().is_none());
    }

    #[test]
    fn brute_force_guard() {
        let s = make_set(2, 10, vec![vec![1, 1]]).unwrap();
        assert!(matches!(
            brute_force_min_height(&s, 10, 3, 10),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }
}
