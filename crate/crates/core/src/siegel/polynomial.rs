//! Exact multivariate integer polynomials.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::ln_biguint;
use crate::error::{Error, Result};

/// Exponent vector `(i_1, ..., i_d)` standing for `x_1^i_1 ... x_d^i_d`.
///
/// Ordered graded-lexicographically: by total degree, then lexicographically
/// on the exponents. Ascending order therefore lists `1, x_d, ..., x_1, x_d^2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `dim` variables of total degree `<= degree`, ascending in
/// graded-lex order. There are `binomial(degree + dim, dim)` of them.
pub fn monomials_up_to(dim: usize, degree: u32) -> Vec<Monomial> {
    fn fill(prefix: &mut Vec<u32>, remaining_vars: usize, budget: u32, out: &mut Vec<Monomial>) {
        if remaining_vars == 0 {
            if budget == 0 {
                out.push(Monomial(prefix.clone()));
            }
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            fill(prefix, remaining_vars - 1, budget - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree {
        fill(&mut Vec::with_capacity(dim), dim, total, &mut out);
    }
    out
}

/// Nonzero polynomial in `Z[x_1, ..., x_d]`. No zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPolynomial {
    dim: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl IntegerPolynomial {
    /// Builds a polynomial, merging repeated monomials and dropping zero
    /// coefficients. Fails with `ZeroPolynomial` if nothing survives.
    pub fn new(dim: usize, terms: impl IntoIterator<Item = (Monomial, BigInt)>) -> Result<Self> {
        let mut map: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (m, c) in terms {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            *map.entry(m).or_default() += c;
        }
        map.retain(|_, c| !c.is_zero());
        if map.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(IntegerPolynomial { dim, terms: map })
    }

    /// Builds a polynomial from a coefficient vector aligned with `monomials`.
    pub fn from_coefficients(dim: usize, monomials: &[Monomial], coeffs: &[BigInt]) -> Result<Self> {
        assert_eq!(monomials.len(), coeffs.len());
        Self::new(dim, monomials.iter().cloned().zip(coeffs.iter().cloned()))
    }

    pub fn constant(dim: usize, c: impl Into<BigInt>) -> Result<Self> {
        Self::new(dim, [(Monomial::one(dim), c.into())])
    }

    /// The coordinate polynomial `x_{i+1}` (zero-based `i`).
    pub fn variable(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::new(dim, [(Monomial(e), BigInt::one())]).expect("nonzero")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&BigInt> {
        self.terms.get(m)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest absolute value of a coefficient.
    pub fn height(&self) -> BigUint {
        self.terms
            .values()
            .map(|c| c.magnitude().clone())
            .max()
            .unwrap_or_default()
    }

    pub fn content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content and makes the leading (graded-lex largest)
    /// coefficient positive.
    pub fn normalized(mut self) -> Self {
        let g = self.content();
        let flip = self
            .terms
            .values()
            .next_back()
            .is_some_and(|c| c.is_negative());
        let g = if flip { -g } else { g };
        if !g.is_one() {
            for c in self.terms.values_mut() {
                *c = &*c / &g;
            }
        }
        self
    }

    /// Exact value at an integer point.
    pub fn evaluate(&self, x: &[u64]) -> Result<BigInt> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let deg = self.degree() as usize;
        // powers[i][k] = x_i^k
        let powers: Vec<Vec<BigInt>> = x
            .iter()
            .map(|&xi| {
                let base = BigInt::from(xi);
                let mut row = Vec::with_capacity(deg + 1);
                let mut acc = BigInt::one();
                for _ in 0..=deg {
                    row.push(acc.clone());
                    acc *= &base;
                }
                row
            })
            .collect();
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term *= &powers[i][e as usize];
                }
            }
            total += term;
        }
        Ok(total)
    }

    pub fn mul(&self, other: &IntegerPolynomial) -> Result<IntegerPolynomial> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *out.entry(ma.mul(mb)).or_default() += ca * cb;
            }
        }
        Self::new(self.dim, out)
    }

    pub fn measure(&self, box_bound: u64) -> PolynomialMeasure {
        measure_polynomial(self, box_bound)
    }
}

impl fmt::Display for IntegerPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let negative = c.is_negative();
            let mag = c.magnitude();
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            first = false;
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Degree, height and complexity `max(degree, ln height / ln N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMeasure {
    pub degree: u32,
    pub height: BigUint,
    pub complexity: f64,
}

pub fn measure_polynomial(p: &IntegerPolynomial, box_bound: u64) -> PolynomialMeasure {
    assert!(box_bound >= 2, "box bound must be at least 2");
    let degree = p.degree();
    let height = p.height();
    let complexity = (degree as f64).max(ln_biguint(&height) / (box_bound as f64).ln());
    PolynomialMeasure {
        degree,
        height,
        complexity,
    }
}
