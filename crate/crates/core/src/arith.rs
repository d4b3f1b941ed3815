//! Small numeric helpers shared across modules.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

/// Natural logarithm of a positive big integer.
///
/// Uses the top 64 bits when the value is too wide for an `f64`.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "ln of zero");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit prefix");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_abs(x: &BigInt) -> f64 {
    ln_biguint(x.magnitude())
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Largest integer `t` with `t^k <= n`.
pub fn integer_root(n: u64, k: u32) -> u64 {
    assert!(k >= 1);
    if k == 1 || n < 2 {
        return n;
    }
    let fits = |t: u64| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..k {
            acc *= t as u128;
            if acc > n as u128 {
                return false;
            }
        }
        true
    };
    let mut t = (n as f64).powf(1.0 / k as f64).floor() as u64;
    while t > 0 && !fits(t) {
        t -= 1;
    }
    while fits(t + 1) {
        t += 1;
    }
    t
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).fold(1u64, |acc, i| acc.saturating_mul(i))
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(21, 2), 210);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(2, 3), 0);
    }

    #[test]
    fn roots() {
        assert_eq!(integer_root(6, 2), 2);
        assert_eq!(integer_root(200, 2), 14);
        assert_eq!(integer_root(8, 3), 2);
        assert_eq!(integer_root(7, 3), 1);
        assert_eq!(integer_root(u64::MAX, 2), 4294967295);
    }

    #[test]
    fn ln_of_wide_integers() {
        let x = BigUint::from(1u8) << 4000u32;
        let expected = 4000.0 * std::f64::consts::LN_2;
        assert!((ln_biguint(&x) - expected).abs() < 1e-9);
        assert!((ln_biguint(&BigUint::from(360000u32)) - 360000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
