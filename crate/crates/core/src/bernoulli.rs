//! Even-index Bernoulli numbers, exact and at working precision.
//!
//! The asymptotic expansions and Euler–Maclaurin tails in this crate need
//! `B_2, B_4, …` up to a few hundred. They are generated once as exact
//! rationals from the tangent numbers and converted to [`Real`] per precision on demand.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::real::Real;

/// Tangent numbers `T_1, …, T_n` (Brent–Harvey), cached and regrown on demand.
fn tangent_numbers(n: usize) -> Vec<BigInt> {
    static TABLE: OnceLock<Mutex<Vec<BigInt>>> = OnceLock::new();
    let mut table = TABLE
        .get_or_init(|| Mutex::new(Vec::new()))
        .lock()
        .expect("tangent table poisoned");
    if table.len() < n {
        let len = n.max(2 * table.len());
        let mut t = vec![BigInt::zero(); len + 1];
        t[1] = BigInt::one();
        for k in 2..=len {
            t[k] = &t[k - 1] * BigInt::from(k - 1);
        }
        for k in 2..=len {
            for j in k..=len {
                t[j] = &t[j - 1] * BigInt::from(j - k) + &t[j] * BigInt::from(j - k + 2);
            }
        }
        t.remove(0);
        *table = t;
    }
    table[..n].to_vec()
}

/// Exact `B_n`; even indices come from `B_2k = (−1)^{k−1} 2k T_k / (4^k (4^k − 1))`.
pub fn bernoulli_exact(n: usize) -> BigRational {
    match n {
        0 => BigRational::one(),
        1 => BigRational::new(BigInt::from(-1), BigInt::from(2)),
        _ if n % 2 == 1 => BigRational::zero(),
        _ => {
            let k = n / 2;
            let t = tangent_numbers(k).pop().expect("k >= 1");
            let four_k = BigInt::one() << (2 * k);
            let den = &four_k * (&four_k - BigInt::one());
            let num = t * BigInt::from(2 * k);
            let b = BigRational::new(num, den);
            if k.is_multiple_of(2) {
                -b
            } else {
                b
            }
        }
    }
}

fn to_real(q: &BigRational, bits: usize) -> Real {
    let num = Real::parse_decimal(&q.numer().to_string(), bits).expect("integer literal");
    let den = Real::parse_decimal(&q.denom().to_string(), bits).expect("integer literal");
    num / den
}

thread_local! {
    static EVEN_CACHE: RefCell<HashMap<usize, Vec<Real>>> = RefCell::new(HashMap::new());
}

/// `B_{2j}` for `j = 1..=count` at `bits` precision (index 0 holds `B_2`).
pub fn even_bernoulli(count: usize, bits: usize) -> Vec<Real> {
    EVEN_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        let entry = cache.entry(bits).or_default();
        while entry.len() < count {
            let j = entry.len() + 1;
            entry.push(to_real(&bernoulli_exact(2 * j), bits));
        }
        entry[..count].to_vec()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn known_values() {
        assert_eq!(bernoulli_exact(0), q(1, 1));
        assert_eq!(bernoulli_exact(1), q(-1, 2));
        assert_eq!(bernoulli_exact(2), q(1, 6));
        assert_eq!(bernoulli_exact(3), q(0, 1));
        assert_eq!(bernoulli_exact(4), q(-1, 30));
        assert_eq!(bernoulli_exact(12), q(-691, 2730));
        assert_eq!(bernoulli_exact(20), q(-174611, 330));
    }

    #[test]
    fn satisfies_binomial_recurrence() {
        // sum_{j=0}^{n} C(n+1, j) B_j = 0 for n >= 1
        for n in 1..=80usize {
            let mut binom = BigInt::one();
            let mut acc = BigRational::zero();
            for j in 0..=n {
                acc += bernoulli_exact(j) * BigRational::from_integer(binom.clone());
                binom = binom * BigInt::from(n + 1 - j) / BigInt::from(j + 1);
            }
            assert!(acc.is_zero(), "n = {n}");
        }
    }

    #[test]
    fn real_conversion() {
        let b = even_bernoulli(6, 128);
        assert_eq!(b.len(), 6);
        assert!((b[0].to_f64() - 1.0 / 6.0).abs() < 1e-17);
        assert!((b[5].to_f64() + 691.0 / 2730.0).abs() < 1e-16);
    }
}
