//! Integer kernels and LLL reduction over arbitrary-precision integers.
//!
//! [`lll_reduce`] is the all-integer variant of LLL (Cohen, "A Course in
//! Computational Algebraic Number Theory", Alg. 2.6.7) with `delta = 3/4`:
//! Gram-Schmidt data is kept as the integers `d_i` and `lambda_{i,j}`, so every
//! division is exact and no rational arithmetic is needed. Those integers grow
//! to thousands of digits on wide kernels, so [`integer_kernel`] first tries
//! [`lll_reduce_fp`], which steers the same unimodular updates with a
//! floating-point Gram-Schmidt (Schnorr-Euchner). The basis itself is only
//! ever changed by exact integer operations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type IntVector = Vec<BigInt>;

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `a -= q * b`
fn sub_mul(a: &mut [BigInt], q: &BigInt, b: &[BigInt]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= q * y;
    }
}

/// Nearest integer to `num / den` for `den > 0`, halves rounded up.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (num * &two + den).div_floor(&(den * two))
}

struct IntegralLll {
    // 1-based storage: b[1..=n], d[0..=n], lambda[i][j] for 1 <= j < i
    b: Vec<IntVector>,
    d: Vec<BigInt>,
    lambda: Vec<Vec<BigInt>>,
}

impl IntegralLll {
    fn redi(&mut self, k: usize, l: usize) {
        let two_lambda: BigInt = &self.lambda[k][l] * 2;
        if two_lambda.abs() <= self.d[l] {
            return;
        }
        let q = round_div(&self.lambda[k][l], &self.d[l]);
        let (lo, hi) = self.b.split_at_mut(k);
        sub_mul(&mut hi[0], &q, &lo[l]);
        let dl = self.d[l].clone();
        self.lambda[k][l] -= &q * dl;
        for i in 1..l {
            let t = &q * &self.lambda[l][i];
            self.lambda[k][i] -= t;
        }
    }

    fn swapi(&mut self, k: usize, kmax: usize) {
        self.b.swap(k, k - 1);
        for j in 1..k - 1 {
            let (lo, hi) = self.lambda.split_at_mut(k);
            std::mem::swap(&mut hi[0][j], &mut lo[k - 1][j]);
        }
        let lam = self.lambda[k][k - 1].clone();
        let big_b = (&self.d[k - 2] * &self.d[k] + &lam * &lam) / &self.d[k - 1];
        for i in k + 1..=kmax {
            let t = self.lambda[i][k].clone();
            let new_ik = (&self.d[k] * &self.lambda[i][k - 1] - &lam * &t) / &self.d[k - 1];
            let new_ik1 = (&big_b * &t + &lam * &new_ik) / &self.d[k];
            self.lambda[i][k] = new_ik;
            self.lambda[i][k - 1] = new_ik1;
        }
        self.d[k - 1] = big_b;
    }
}

/// LLL-reduces a basis of linearly independent integer vectors.
///
/// Returns `Internal` if the input vectors turn out to be dependent.
pub fn lll_reduce(basis: Vec<IntVector>) -> Result<Vec<IntVector>> {
    let n = basis.len();
    if n <= 1 {
        return Ok(basis);
    }
    let mut b = Vec::with_capacity(n + 1);
    b.push(Vec::new());
    b.extend(basis);
    let mut st = IntegralLll {
        d: vec![BigInt::zero(); n + 1],
        lambda: vec![vec![BigInt::zero(); n + 1]; n + 1],
        b,
    };
    st.d[0] = BigInt::from(1);
    st.d[1] = dot(&st.b[1], &st.b[1]);
    if st.d[1].is_zero() {
        return Err(Error::Internal("LLL input contains a zero vector".into()));
    }
    let mut k = 2;
    let mut kmax = 1;
    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&st.b[k], &st.b[j]);
                for i in 1..j {
                    u = (&st.d[i] * &u - &st.lambda[k][i] * &st.lambda[j][i]) / &st.d[i - 1];
                }
                if j < k {
                    st.lambda[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(Error::Internal("LLL input vectors are linearly dependent".into()));
                    }
                    st.d[k] = u;
                }
            }
        }
        loop {
            st.redi(k, k - 1);
            let lhs = BigInt::from(4) * &st.d[k] * &st.d[k - 2];
            let rhs = BigInt::from(3) * &st.d[k - 1] * &st.d[k - 1]
                - BigInt::from(4) * &st.lambda[k][k - 1] * &st.lambda[k][k - 1];
            if lhs < rhs {
                st.swapi(k, kmax);
                k = (k - 1).max(2);
            } else {
                for l in (1..k - 1).rev() {
                    st.redi(k, l);
                }
                k += 1;
                break;
            }
        }
    }
    st.b.remove(0);
    Ok(st.b)
}

/// `x * 2^-shift` as a float, without overflowing on wide integers.
fn scaled(x: &BigInt, shift: u64) -> f64 {
    let bits = x.bits();
    let drop = bits.saturating_sub(64);
    let top = (x >> drop).to_f64().expect("at most 64 significant bits");
    ldexp(top, drop as i64 - shift as i64)
}

fn ldexp(mut m: f64, mut e: i64) -> f64 {
    while e > 1000 && m.is_finite() && m != 0.0 {
        m *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 && m != 0.0 {
        m *= 2f64.powi(-1000);
        e += 1000;
    }
    m * 2f64.powi(e.clamp(-1100, 1100) as i32)
}

fn fdot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Floating-point LLL with parameter `delta`.
///
/// Returns `None` when the floating-point Gram-Schmidt data stops being
/// trustworthy (non-finite or nonpositive norms, or no progress within the
/// step budget); callers then fall back to [`lll_reduce`]. Any returned basis
/// spans the same lattice as the input.
pub fn lll_reduce_fp(basis: Vec<IntVector>, delta: f64) -> Option<Vec<IntVector>> {
    let n = basis.len();
    if n <= 1 {
        return Some(basis);
    }
    let mut b = basis;
    let max_bits = b.iter().flatten().map(BigInt::bits).max().unwrap_or(0);
    // keep squared norms well inside the exponent range
    let shift = max_bits.saturating_sub(400);
    let approx = |v: &IntVector| -> Vec<f64> { v.iter().map(|x| scaled(x, shift)).collect() };
    let mut bf: Vec<Vec<f64>> = b.iter().map(approx).collect();
    let mut mu = vec![vec![0.0f64; n]; n];
    let mut norms = vec![0.0f64; n];
    let budget = n * n * (64 + max_bits as usize);
    let mut steps = 0usize;

    norms[0] = fdot(&bf[0], &bf[0]);
    let mut k = 1;
    while k < n {
        steps += 1;
        if steps > budget || !(norms[0] > 0.0 && norms[0].is_finite()) {
            return None;
        }
        let mut passes = 0;
        loop {
            passes += 1;
            if passes > 64 {
                return None;
            }
            let nk = fdot(&bf[k], &bf[k]);
            for j in 0..k {
                let mut s = fdot(&bf[k], &bf[j]);
                // exact inner product when the float one has cancelled
                if s.abs() < 1e-6 * (nk * fdot(&bf[j], &bf[j])).sqrt() {
                    s = scaled(&dot(&b[k], &b[j]), 2 * shift);
                }
                for i in 0..j {
                    s -= mu[j][i] * mu[k][i] * norms[i];
                }
                mu[k][j] = s / norms[j];
            }
            let mut changed = false;
            for j in (0..k).rev() {
                let m = mu[k][j];
                if !m.is_finite() {
                    return None;
                }
                if m.abs() > 0.51 {
                    let q = m.round();
                    let qi = BigInt::from_f64(q)?;
                    let (lo, hi) = b.split_at_mut(k);
                    sub_mul(&mut hi[0], &qi, &lo[j]);
                    for i in 0..j {
                        mu[k][i] -= q * mu[j][i];
                    }
                    mu[k][j] -= q;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            bf[k] = approx(&b[k]);
        }
        let full = fdot(&bf[k], &bf[k]);
        let mut nk = full;
        for j in 0..k {
            nk -= mu[k][j] * mu[k][j] * norms[j];
        }
        if !nk.is_finite() {
            return None;
        }
        // Below float resolution B_k has cancelled to noise. Its true value
        // is then tiny, so the exchange condition holds whenever B_{k-1} is
        // itself resolvable.
        let cancelled = nk <= 1e-10 * full;
        if cancelled && norms[k - 1] <= 1e-6 * full {
            return None;
        }
        norms[k] = nk;
        if cancelled || delta * norms[k - 1] > nk + mu[k][k - 1] * mu[k][k - 1] * norms[k - 1] {
            b.swap(k, k - 1);
            bf.swap(k, k - 1);
            if k == 1 {
                norms[0] = fdot(&bf[0], &bf[0]);
            }
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
    Some(b)
}

/// An LLL-reduced basis of `{v in Z^cols : A v = 0}`.
///
/// Constraints are imposed one row at a time: the current basis is
/// transformed unimodularly (Euclid on the row's inner products) until a
/// single vector pairs nontrivially with the row, that vector is dropped, and
/// the survivors are re-reduced to keep entries small.
pub fn integer_kernel(rows: &[IntVector], cols: usize) -> Result<Vec<IntVector>> {
    let mut basis: Vec<IntVector> = (0..cols)
        .map(|i| {
            let mut e = vec![BigInt::zero(); cols];
            e[i] = BigInt::from(1);
            e
        })
        .collect();
    for row in rows {
        if row.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: row.len(),
            });
        }
        let mut t: Vec<BigInt> = basis.iter().map(|b| dot(row, b)).collect();
        if t.iter().all(Zero::is_zero) {
            continue;
        }
        loop {
            let pivot = (0..t.len())
                .filter(|&j| !t[j].is_zero())
                .min_by(|&a, &b| t[a].magnitude().cmp(t[b].magnitude()))
                .expect("some nonzero entry");
            let mut others = false;
            for l in 0..t.len() {
                if l == pivot || t[l].is_zero() {
                    continue;
                }
                let q = round_div_signed(&t[l], &t[pivot]);
                if !q.is_zero() {
                    let pv = basis[pivot].clone();
                    sub_mul(&mut basis[l], &q, &pv);
                    let tp = t[pivot].clone();
                    t[l] -= &q * tp;
                }
                if !t[l].is_zero() {
                    others = true;
                }
            }
            if !others {
                basis.remove(pivot);
                break;
            }
        }
        basis = match lll_reduce_fp(basis.clone(), 0.99) {
            Some(reduced) => reduced,
            None => lll_reduce(basis)?,
        };
    }
    Ok(basis)
}

/// Nearest integer to `num / den` for any nonzero `den`.
fn round_div_signed(num: &BigInt, den: &BigInt) -> BigInt {
    if den.is_negative() {
        round_div(&-num, &-den)
    } else {
        round_div(num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::One;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> IntVector {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// Rational Gram-Schmidt, used only to check the Lovasz condition.
    fn gram_schmidt(b: &[IntVector]) -> (Vec<Vec<BigRational>>, Vec<Vec<BigRational>>) {
        let n = b.len();
        let mut star: Vec<Vec<BigRational>> = Vec::new();
        let mut mu = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            let mut bi: Vec<BigRational> = b[i].iter().cloned().map(BigRational::from_integer).collect();
            for j in 0..i {
                let num: BigRational = b[i]
                    .iter()
                    .zip(&star[j])
                    .map(|(x, y)| BigRational::from_integer(x.clone()) * y)
                    .sum();
                let den: BigRational = star[j].iter().map(|y| y * y).sum();
                mu[i][j] = num / den;
                for (x, y) in bi.iter_mut().zip(&star[j]) {
                    *x -= &mu[i][j] * y;
                }
            }
            star.push(bi);
        }
        (star, mu)
    }

    fn assert_lll_reduced(b: &[IntVector]) {
        assert_reduced_within(b, BigRational::new(BigInt::one(), BigInt::from(2)));
    }

    fn assert_reduced_within(b: &[IntVector], half: BigRational) {
        let (star, mu) = gram_schmidt(b);
        let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
        for i in 0..b.len() {
            for j in 0..i {
                assert!(mu[i][j].abs() <= half, "size reduction fails at ({i},{j})");
            }
        }
        for k in 1..b.len() {
            let nk: BigRational = star[k].iter().map(|y| y * y).sum();
            let nk1: BigRational = star[k - 1].iter().map(|y| y * y).sum();
            assert!(nk >= (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * nk1, "Lovasz fails at {k}");
        }
    }

    fn determinant_abs(m: &[IntVector]) -> BigInt {
        // fraction-free Bareiss elimination
        let n = m.len();
        let mut a: Vec<IntVector> = m.to_vec();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        prev.abs()
    }

    #[test]
    fn reduces_textbook_basis() {
        let basis = vec![v(&[1, 1, 1]), v(&[-1, 0, 2]), v(&[3, 5, 6])];
        let reduced = lll_reduce(basis.clone()).unwrap();
        assert_lll_reduced(&reduced);
        assert_eq!(determinant_abs(&basis), determinant_abs(&reduced));
        assert_eq!(reduced[0], v(&[0, 1, 0]));
    }

    #[test]
    fn rejects_dependent_input() {
        assert!(lll_reduce(vec![v(&[1, 2]), v(&[2, 4])]).is_err());
    }

    #[test]
    fn kernel_of_small_system() {
        // x + 2y + 3z = 0
        let k = integer_kernel(&[v(&[1, 2, 3])], 3).unwrap();
        assert_eq!(k.len(), 2);
        for b in &k {
            assert!(dot(&v(&[1, 2, 3]), b).is_zero());
        }
        // the kernel lattice has determinant |(1,2,3)| / gcd = sqrt(14): Gram det 14
        let gram: Vec<IntVector> = k.iter().map(|a| k.iter().map(|b| dot(a, b)).collect()).collect();
        assert_eq!(determinant_abs(&gram), BigInt::from(14));
    }

    #[test]
    fn kernel_is_saturated() {
        // 2x - 4y = 0 has kernel generated by (2, 1), not (4, 2)
        let k = integer_kernel(&[v(&[2, -4])], 2).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].iter().map(|x| x.abs()).collect::<Vec<_>>(), v(&[2, 1]));
    }

    #[test]
    fn redundant_rows_are_skipped() {
        let k = integer_kernel(&[v(&[1, -1, 0]), v(&[2, -2, 0])], 3).unwrap();
        assert_eq!(k.len(), 2);
    }

    proptest! {
        #[test]
        fn lll_output_is_reduced_and_unimodular(entries in prop::collection::vec(-30i64..30, 9)) {
            let basis: Vec<IntVector> = entries.chunks(3).map(v).collect();
            prop_assume!(!determinant_abs(&basis).is_zero());
            let reduced = lll_reduce(basis.clone()).unwrap();
            assert_lll_reduced(&reduced);
            prop_assert_eq!(determinant_abs(&basis), determinant_abs(&reduced));
        }

        #[test]
        fn float_guided_output_is_reduced_and_unimodular(
            entries in prop::collection::vec(-1000i64..1000, 16),
            scale_bits in 0u32..700,
        ) {
            // the first column is scaled up so entries span hundreds of bits
            let big = BigInt::one() << scale_bits;
            let basis: Vec<IntVector> = entries
                .chunks(4)
                .map(|c| {
                    let mut row = v(c);
                    row[0] *= &big;
                    row
                })
                .collect();
            prop_assume!(!determinant_abs(&basis).is_zero());
            // giving up is allowed; a returned basis must be reduced
            let Some(reduced) = lll_reduce_fp(basis.clone(), 0.99) else {
                return Ok(());
            };
            assert_reduced_within(&reduced, BigRational::new(BigInt::from(51), BigInt::from(100)));
            prop_assert_eq!(determinant_abs(&basis), determinant_abs(&reduced));
        }

        #[test]
        fn kernel_vectors_annihilate_rows(entries in prop::collection::vec(-50i64..50, 10)) {
            let rows: Vec<IntVector> = entries.chunks(5).map(v).collect();
            let k = integer_kernel(&rows, 5).unwrap();
            for b in &k {
                for r in &rows {
                    prop_assert!(dot(r, b).is_zero());
                }
            }
            // rank-nullity: rank of two rows in Z^5
            let rank = if rows.iter().all(|r| r.iter().all(Zero::is_zero)) {
                0
            } else {
                let minors = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j)));
                let independent = minors
                    .into_iter()
                    .any(|(i, j)| !(&rows[0][i] * &rows[1][j] - &rows[0][j] * &rows[1][i]).is_zero());
                if independent { 2 } else { 1 }
            };
            prop_assert_eq!(k.len(), 5 - rank);
        }
    }
}
